#pragma once

// Real trigonometric transforms between truncated Fourier coefficients and
// equispaced samples on [0, 2 pi), backed by FFTW.
//
// Coefficient layout for an R^n-valued loop with N modes:
//   [a0 (n) | acos_1 (n) | asin_1 (n) | ... | acos_N (n) | asin_N (n)]
// Samples are component-major: s[i*M + j] = u_i(2 pi j / M).

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace equideg {

// Smallest 2-3-5-smooth integer >= m.
std::size_t smooth_size(std::size_t m);

inline std::size_t coefficient_count(std::size_t n, int modes) { return n * (2 * std::size_t(modes) + 1); }

class FourierTransform {
 public:
  // m = 0 picks smooth_size(4N + 1).
  FourierTransform(std::size_t n, int modes, std::size_t m = 0);
  ~FourierTransform();
  FourierTransform(const FourierTransform&) = delete;
  FourierTransform& operator=(const FourierTransform&) = delete;

  std::size_t dimension() const noexcept { return n_; }
  int modes() const noexcept { return modes_; }
  std::size_t nodes() const noexcept { return m_; }

  void synthesize(std::span<const double> coeffs, std::span<double> samples) const;
  // Discrete projection onto modes 0..N (mode N < M/2 so no Nyquist term).
  void analyze(std::span<const double> samples, std::span<double> coeffs) const;
  // (1/M) sum_j row(t_j) e^{-i m t_j} for m = 0..kmax of `rows` rows of
  // length M (kmax <= M/2).
  void spectrum(std::span<const double> rows, std::size_t count, int kmax, std::span<std::complex<double>> out) const;

 private:
  struct Plans;
  std::size_t n_;
  int modes_;
  std::size_t m_;
  std::unique_ptr<Plans> plans_;
};

}  // namespace equideg
