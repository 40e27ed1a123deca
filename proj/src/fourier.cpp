#include "equideg/fourier.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>
#include <vector>

#include "equideg/error.hpp"

namespace equideg {

namespace {
// The FFTW planner is not thread safe; execution with the new-array
// interface is.
std::mutex& planner_mutex() {
  static std::mutex mu;
  return mu;
}
}  // namespace

std::size_t smooth_size(std::size_t m) {
  for (std::size_t c = std::max<std::size_t>(m, 1);; ++c) {
    std::size_t r = c;
    for (std::size_t p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return c;
  }
}

struct FourierTransform::Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

FourierTransform::FourierTransform(std::size_t n, int modes, std::size_t m)
    : n_(n), modes_(modes), m_(m ? m : smooth_size(4 * std::size_t(modes) + 1)), plans_(std::make_unique<Plans>()) {
  if (modes < 0) throw PreconditionError("FourierTransform: negative mode count");
  if (2 * std::size_t(modes) >= m_) throw PreconditionError("FourierTransform: need M > 2N nodes");
  std::vector<double> real(m_);
  fftw_complex* spec = fftw_alloc_complex(m_ / 2 + 1);
  {
    std::lock_guard lock(planner_mutex());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    plans_->r2c = fftw_plan_dft_r2c_1d(int(m_), real.data(), spec, flags);
    plans_->c2r = fftw_plan_dft_c2r_1d(int(m_), spec, real.data(), flags | FFTW_DESTROY_INPUT);
  }
  fftw_free(spec);
  if (!plans_->r2c || !plans_->c2r) throw Error("FourierTransform: FFTW planning failed");
}

FourierTransform::~FourierTransform() {
  std::lock_guard lock(planner_mutex());
  if (plans_->r2c) fftw_destroy_plan(plans_->r2c);
  if (plans_->c2r) fftw_destroy_plan(plans_->c2r);
}

void FourierTransform::synthesize(std::span<const double> coeffs, std::span<double> samples) const {
  if (coeffs.size() != coefficient_count(n_, modes_) || samples.size() != n_ * m_)
    throw PreconditionError("synthesize: size mismatch");
  std::vector<std::complex<double>> spec(m_ / 2 + 1);
  for (std::size_t i = 0; i < n_; ++i) {
    std::fill(spec.begin(), spec.end(), std::complex<double>(0.0));
    spec[0] = coeffs[i];
    for (int k = 1; k <= modes_; ++k) {
      const double c = coeffs[n_ * (2 * std::size_t(k) - 1) + i];
      const double s = coeffs[n_ * 2 * std::size_t(k) + i];
      spec[std::size_t(k)] = {0.5 * c, -0.5 * s};
    }
    fftw_execute_dft_c2r(plans_->c2r, reinterpret_cast<fftw_complex*>(spec.data()), samples.data() + i * m_);
  }
}

void FourierTransform::analyze(std::span<const double> samples, std::span<double> coeffs) const {
  if (coeffs.size() != coefficient_count(n_, modes_) || samples.size() != n_ * m_)
    throw PreconditionError("analyze: size mismatch");
  std::vector<std::complex<double>> spec(m_ / 2 + 1);
  const double inv = 1.0 / double(m_);
  for (std::size_t i = 0; i < n_; ++i) {
    fftw_execute_dft_r2c(plans_->r2c, const_cast<double*>(samples.data() + i * m_),
                         reinterpret_cast<fftw_complex*>(spec.data()));
    coeffs[i] = spec[0].real() * inv;
    for (int k = 1; k <= modes_; ++k) {
      coeffs[n_ * (2 * std::size_t(k) - 1) + i] = 2 * inv * spec[std::size_t(k)].real();
      coeffs[n_ * 2 * std::size_t(k) + i] = -2 * inv * spec[std::size_t(k)].imag();
    }
  }
}

void FourierTransform::spectrum(std::span<const double> rows, std::size_t count, int kmax,
                                std::span<std::complex<double>> out) const {
  if (kmax < 0 || std::size_t(kmax) > m_ / 2) throw PreconditionError("spectrum: kmax exceeds M/2");
  if (rows.size() != count * m_ || out.size() != count * (std::size_t(kmax) + 1))
    throw PreconditionError("spectrum: size mismatch");
  std::vector<std::complex<double>> spec(m_ / 2 + 1);
  const double inv = 1.0 / double(m_);
  for (std::size_t r = 0; r < count; ++r) {
    fftw_execute_dft_r2c(plans_->r2c, const_cast<double*>(rows.data() + r * m_),
                         reinterpret_cast<fftw_complex*>(spec.data()));
    for (int k = 0; k <= kmax; ++k) out[r * (std::size_t(kmax) + 1) + std::size_t(k)] = spec[std::size_t(k)] * inv;
  }
}

}  // namespace equideg
