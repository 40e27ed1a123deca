#include <cmath>

#include "equideg/kernels.hpp"

namespace equideg::kernels::scalar {

namespace {
double radius2(const KeplerArgs& k, const double* x, std::size_t j) {
  double r2 = 0;
  for (std::size_t i = 0; i < k.n; ++i) r2 += x[i * k.m + j] * x[i * k.m + j];
  return r2;
}
}  // namespace

void kepler_gradient(const KeplerArgs& k, const double* x, double* g) {
  for (std::size_t j = 0; j < k.m; ++j) {
    const double q = radius2(k, x, j) + k.a;
    const double f = k.s / (q * std::sqrt(q));
    for (std::size_t i = 0; i < k.n; ++i) g[i * k.m + j] += f * x[i * k.m + j];
  }
}

void kepler_hessian_apply(const KeplerArgs& k, const double* x, const double* v, double* y) {
  for (std::size_t j = 0; j < k.m; ++j) {
    double r2 = 0, xv = 0;
    for (std::size_t i = 0; i < k.n; ++i) {
      r2 += x[i * k.m + j] * x[i * k.m + j];
      xv += x[i * k.m + j] * v[i * k.m + j];
    }
    const double q = r2 + k.a;
    const double f = k.s / (q * q * std::sqrt(q));
    for (std::size_t i = 0; i < k.n; ++i) y[i * k.m + j] += f * (q * v[i * k.m + j] - 3.0 * xv * x[i * k.m + j]);
  }
}

void kepler_potential(const KeplerArgs& k, const double* x, double* w) {
  for (std::size_t j = 0; j < k.m; ++j) w[j] += -k.s / std::sqrt(radius2(k, x, j) + k.a);
}

double dot(std::size_t n, const double* x, const double* y) {
  double s = 0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace equideg::kernels::scalar
