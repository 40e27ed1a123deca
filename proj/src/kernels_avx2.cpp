// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include <cmath>

#include "equideg/kernels.hpp"

namespace equideg::kernels::avx2 {

namespace {
inline __m256d radius2(const KeplerArgs& k, const double* x, std::size_t j) {
  __m256d r2 = _mm256_setzero_pd();
  for (std::size_t i = 0; i < k.n; ++i) {
    const __m256d xi = _mm256_loadu_pd(x + i * k.m + j);
    r2 = _mm256_fmadd_pd(xi, xi, r2);
  }
  return r2;
}
}  // namespace

void kepler_gradient(const KeplerArgs& k, const double* x, double* g) {
  const __m256d a = _mm256_set1_pd(k.a), s = _mm256_set1_pd(k.s);
  std::size_t j = 0;
  for (; j + 4 <= k.m; j += 4) {
    const __m256d q = _mm256_add_pd(radius2(k, x, j), a);
    const __m256d f = _mm256_div_pd(s, _mm256_mul_pd(q, _mm256_sqrt_pd(q)));
    for (std::size_t i = 0; i < k.n; ++i) {
      double* gi = g + i * k.m + j;
      _mm256_storeu_pd(gi, _mm256_fmadd_pd(f, _mm256_loadu_pd(x + i * k.m + j), _mm256_loadu_pd(gi)));
    }
  }
  for (; j < k.m; ++j) {
    double r2 = 0;
    for (std::size_t i = 0; i < k.n; ++i) r2 += x[i * k.m + j] * x[i * k.m + j];
    const double q = r2 + k.a;
    const double f = k.s / (q * std::sqrt(q));
    for (std::size_t i = 0; i < k.n; ++i) g[i * k.m + j] += f * x[i * k.m + j];
  }
}

void kepler_hessian_apply(const KeplerArgs& k, const double* x, const double* v, double* y) {
  const __m256d a = _mm256_set1_pd(k.a), s = _mm256_set1_pd(k.s), three = _mm256_set1_pd(3.0);
  std::size_t j = 0;
  for (; j + 4 <= k.m; j += 4) {
    __m256d r2 = _mm256_setzero_pd(), xv = _mm256_setzero_pd();
    for (std::size_t i = 0; i < k.n; ++i) {
      const __m256d xi = _mm256_loadu_pd(x + i * k.m + j);
      r2 = _mm256_fmadd_pd(xi, xi, r2);
      xv = _mm256_fmadd_pd(xi, _mm256_loadu_pd(v + i * k.m + j), xv);
    }
    const __m256d q = _mm256_add_pd(r2, a);
    const __m256d f = _mm256_div_pd(s, _mm256_mul_pd(_mm256_mul_pd(q, q), _mm256_sqrt_pd(q)));
    const __m256d c = _mm256_mul_pd(three, xv);
    for (std::size_t i = 0; i < k.n; ++i) {
      const __m256d xi = _mm256_loadu_pd(x + i * k.m + j);
      const __m256d t = _mm256_fnmadd_pd(c, xi, _mm256_mul_pd(q, _mm256_loadu_pd(v + i * k.m + j)));
      double* yi = y + i * k.m + j;
      _mm256_storeu_pd(yi, _mm256_fmadd_pd(f, t, _mm256_loadu_pd(yi)));
    }
  }
  for (; j < k.m; ++j) {
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
  const __m256d a = _mm256_set1_pd(k.a), s = _mm256_set1_pd(k.s);
  std::size_t j = 0;
  for (; j + 4 <= k.m; j += 4) {
    const __m256d q = _mm256_add_pd(radius2(k, x, j), a);
    const __m256d t = _mm256_div_pd(s, _mm256_sqrt_pd(q));
    _mm256_storeu_pd(w + j, _mm256_sub_pd(_mm256_loadu_pd(w + j), t));
  }
  for (; j < k.m; ++j) {
    double r2 = 0;
    for (std::size_t i = 0; i < k.n; ++i) r2 += x[i * k.m + j] * x[i * k.m + j];
    w[j] += -k.s / std::sqrt(r2 + k.a);
  }
}

double dot(std::size_t n, const double* x, const double* y) {
  __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d al = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(al, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace equideg::kernels::avx2
