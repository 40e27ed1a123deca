#pragma once

// Truncated-Fourier (harmonic balance) discretisation of
//   u'' = -grad_u V(u, lambda),  u 2pi-periodic,
// with a Newton solver and amplitude-parameterised continuation toward
// infinity.

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "equideg/fourier.hpp"
#include "equideg/problem.hpp"
#include "equideg/spectral.hpp"

namespace equideg {

struct FourierLoop {
  std::size_t n = 0;
  int modes = 0;
  std::vector<double> coeffs;  // layout of fourier.hpp

  FourierLoop() = default;
  FourierLoop(std::size_t n, int modes) : n(n), modes(modes), coeffs(coefficient_count(n, modes), 0.0) {}

  // amplitude * direction * cos(k t)
  static FourierLoop cosine(std::size_t n, int modes, int k, std::span<const double> direction, double amplitude);

  std::size_t size() const noexcept { return coeffs.size(); }
  std::span<double> a0() { return {coeffs.data(), n}; }
  std::span<double> acos(int k) { return {coeffs.data() + n * (2 * std::size_t(k) - 1), n}; }
  std::span<double> asin(int k) { return {coeffs.data() + n * 2 * std::size_t(k), n}; }
  std::span<const double> a0() const { return {coeffs.data(), n}; }
  std::span<const double> acos(int k) const { return {coeffs.data() + n * (2 * std::size_t(k) - 1), n}; }
  std::span<const double> asin(int k) const { return {coeffs.data() + n * 2 * std::size_t(k), n}; }

  std::vector<double> eval(double t) const;
  // Zero padded or truncated to `modes` modes.
  FourierLoop resized(int new_modes) const;
  // t -> u(t + s).
  FourierLoop shifted(double s) const;
  FourierLoop derivative() const;
  // |acos_k|^2 + |asin_k|^2 (|a0|^2 for k = 0).
  double mode_energy(int k) const;
  // sup_t |u(t)| over `nodes` equispaced samples (0: 4N+1 smooth).
  double amplitude(std::size_t nodes = 0) const;

  friend bool operator==(const FourierLoop&, const FourierLoop&) = default;
};

// Coefficients of grad V(u(t), lambda) minus those of u'': per mode
// -k^2 a_k + g_k, computed on M >= 4N+1 nodes (0: smallest smooth size).
std::vector<double> residual(const FourierLoop& u, double lambda, const ProblemSpec& p, std::size_t nodes = 0);

enum class JacobianMethod { analytic, finite_difference };

// Dense d residual / d coeffs, row-major D x D. Analytic uses the Fourier
// coefficients of the pointwise Hessian; finite differences perturb each
// coefficient forward.
std::vector<double> assemble_jacobian(const FourierLoop& u, double lambda, const ProblemSpec& p,
                                      JacobianMethod method = JacobianMethod::analytic, std::size_t nodes = 0);

// J v without forming J.
std::vector<double> jacobian_apply(const FourierLoop& u, double lambda, const ProblemSpec& p,
                                   std::span<const double> v, std::size_t nodes = 0);

struct GalerkinOptions {
  int modes = 32;          // initial truncation N
  int max_modes = 8192;    // adaptive refinement cap
  bool adaptive = true;    // double N until the spectral tail is resolved
  double tail_tol = 1e-13; // relative size of the upper half of the spectrum
  double tol = 1e-10;      // Newton tolerance on the augmented residual
  int max_iter = 50;
  // Dense forward-difference Jacobian + LU (small N only) instead of the
  // matrix-free Newton-Krylov path.
  JacobianMethod jacobian = JacobianMethod::analytic;
};

struct SolveResult {
  FourierLoop loop;
  double lambda = 0;
  double residual_norm = 0;   // |residual(loop, lambda)|
  double augmented_norm = 0;  // including phase / amplitude rows
  double sigma = 0;           // unfolding parameter along the orbit tangent
  int iterations = 0;
  int linear_iterations = 0;
  bool converged = false;
};

// Fixed-lambda Newton with the phase condition <u'_ref, u> = 0 taken from
// the guess. Throws ConvergenceError or RankError (with condition estimate).
SolveResult newton_solve_detailed(const FourierLoop& guess, double lambda, const ProblemSpec& p,
                                  const GalerkinOptions& opts = {});
FourierLoop newton_solve(const FourierLoop& guess, double lambda, const ProblemSpec& p,
                         const GalerkinOptions& opts = {});

// Joint solve for (loop, lambda) with the phase condition and the amplitude
// pin |(acos_k0, asin_k0)| = target.
SolveResult solve_pinned(const FourierLoop& guess, double lambda_guess, int k0, double target, const ProblemSpec& p,
                         const GalerkinOptions& opts = {});

// 0 for a constant loop, else gcd of the active modes (energy above
// rel_threshold times the nonconstant total).
int minimal_period_divisor(const FourierLoop& u, double rel_threshold = 1e-10);
double minimal_period(const FourierLoop& u, double rel_threshold = 1e-10);
std::set<int> active_modes(const FourierLoop& u, double rel_threshold = 1e-10);

// 1/2 |u'|^2 + V(u, lambda) on the collocation nodes, and its relative
// spread max|E - mean| / max(1, |mean|).
std::vector<double> energy_samples(const FourierLoop& u, double lambda, const ProblemSpec& p, std::size_t nodes = 0);
double energy_variation(const FourierLoop& u, double lambda, const ProblemSpec& p, std::size_t nodes = 0);

struct BranchPoint {
  FourierLoop loop;
  double lambda = 0;
  double amplitude = 0;      // pinned mode-k0 norm
  double sup_amplitude = 0;  // sup_t |u(t)|
  double residual_norm = 0;
  std::set<int> active;
  int min_period_divisor = 0;
  double energy_variation = 0;
  int newton_iterations = 0;
};

struct Branch {
  int k0 = 0;
  int direction = 0;  // index into the kernel eigenvectors of A(lambda0) at k0^2
  double lambda0 = 0;
  std::vector<BranchPoint> points;
  bool failed = false;
  std::string failure;
  double drift_sup_tail = 0;  // sup over the last half of |lambda(R) - lambda0|
  std::vector<std::string> warnings;
};

struct ContinuationOptions : GalerkinOptions {
  int k0 = 0;  // 0: smallest nonzero frequency of the resonance
  double period_threshold = 1e-10;
  double drift_window = 0.5;  // divergence warning when |lambda - lambda0| exceeds this
};

// One branch per kernel direction of A(lambda0) at k0^2.
std::vector<Branch> continue_to_infinity(const ProblemSpec& p, const ResonancePoint& r,
                                         const std::vector<double>& amplitudes, const ContinuationOptions& opts = {});

}  // namespace equideg
