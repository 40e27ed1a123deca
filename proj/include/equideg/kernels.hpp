#pragma once

// Pointwise hot loops of the Galerkin harness over component-major sample
// arrays: x[i*m + j] is component i at node j. Each routine has a scalar
// reference implementation and an AVX2 variant; the unqualified entry points
// dispatch at runtime (EQUIDEG_SIMD=scalar|avx2 overrides detection).

#include <cstddef>
#include <string_view>

namespace equideg::kernels {

enum class Isa { scalar, avx2 };

bool avx2_supported();
Isa active_isa();
std::string_view isa_name(Isa isa);

// Kepler-type perturbation W(x) = -s / sqrt(|x|^2 + a).
//   g = grad W      = s x / (|x|^2 + a)^{3/2}
//   y = Hess W . v  = s ((|x|^2 + a) v - 3 x <x,v>) / (|x|^2 + a)^{5/2}
//   w = W
// Results are accumulated (+=) into the output so the caller can add a
// linear part first.
struct KeplerArgs {
  std::size_t n = 0;  // components
  std::size_t m = 0;  // nodes
  double s = 1;
  double a = 1;
};

#define EQUIDEG_KERNEL_DECLS                                                                    \
  void kepler_gradient(const KeplerArgs& k, const double* x, double* g);                        \
  void kepler_hessian_apply(const KeplerArgs& k, const double* x, const double* v, double* y); \
  void kepler_potential(const KeplerArgs& k, const double* x, double* w);                       \
  double dot(std::size_t n, const double* x, const double* y);                                  \
  void axpy(std::size_t n, double alpha, const double* x, double* y);

EQUIDEG_KERNEL_DECLS

namespace scalar {
EQUIDEG_KERNEL_DECLS
}

namespace avx2 {
// Must only be called when avx2_supported().
EQUIDEG_KERNEL_DECLS
}

#undef EQUIDEG_KERNEL_DECLS

}  // namespace equideg::kernels
