#include "equideg/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace equideg::kernels {

bool avx2_supported() {
#if defined(__x86_64__) || defined(__i386__)
  static const bool ok = [] {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  }();
  return ok;
#else
  return false;
#endif
}

Isa active_isa() {
  static const Isa isa = [] {
    const char* env = std::getenv("EQUIDEG_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return Isa::scalar;
    return avx2_supported() ? Isa::avx2 : Isa::scalar;
  }();
  return isa;
}

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

#define EQUIDEG_DISPATCH(call) \
  (active_isa() == Isa::avx2 ? avx2::call : scalar::call)

void kepler_gradient(const KeplerArgs& k, const double* x, double* g) { EQUIDEG_DISPATCH(kepler_gradient(k, x, g)); }
void kepler_hessian_apply(const KeplerArgs& k, const double* x, const double* v, double* y) {
  EQUIDEG_DISPATCH(kepler_hessian_apply(k, x, v, y));
}
void kepler_potential(const KeplerArgs& k, const double* x, double* w) { EQUIDEG_DISPATCH(kepler_potential(k, x, w)); }
double dot(std::size_t n, const double* x, const double* y) { return EQUIDEG_DISPATCH(dot(n, x, y)); }
void axpy(std::size_t n, double alpha, const double* x, double* y) { EQUIDEG_DISPATCH(axpy(n, alpha, x, y)); }

#undef EQUIDEG_DISPATCH

}  // namespace equideg::kernels
