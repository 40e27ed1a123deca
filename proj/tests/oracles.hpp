#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the library's numerical code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <vector>

namespace oracle {

using Dense = std::vector<std::vector<double>>;

// Number of eigenvalues of symmetric `a` below x: the count of negative
// pivots of the LDL^T factorisation of a - x I (Sylvester inertia), i.e.
// the sign changes of the leading principal minors of the characteristic
// matrix. A pivot that is tiny against the matrix scale would make the
// elimination unstable; x is then nudged by a negligible amount.
inline int count_below(const Dense& a, double x) {
  const std::size_t n = a.size();
  double scale = 1;
  for (const auto& row : a)
    for (double v : row) scale = std::max(scale, std::abs(v));
  for (int attempt = 0;; ++attempt) {
    std::vector<std::vector<long double>> m(n, std::vector<long double>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m[i][j] = a[i][j] - (i == j ? x : 0.0);
    int neg = 0;
    bool tiny = false;
    for (std::size_t k = 0; k < n && !tiny; ++k) {
      const long double piv = m[k][k];
      if (std::abs(piv) < 1e-12L * (scale + std::abs(x))) {
        tiny = true;
        break;
      }
      if (piv < 0) ++neg;
      for (std::size_t i = k + 1; i < n; ++i) {
        const long double f = m[i][k] / piv;
        for (std::size_t j = k + 1; j < n; ++j) m[i][j] -= f * m[k][j];
      }
    }
    if (!tiny || attempt == 8) return neg;
    x += 1e-11 * (scale + std::abs(x)) * (attempt + 1);
  }
}

// All eigenvalues, ascending, by bisection on count_below inside the
// Gershgorin interval.
inline std::vector<double> eigenvalues_by_bisection(const Dense& a) {
  const std::size_t n = a.size();
  double lo = 0, hi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) r += std::abs(a[i][j]);
    lo = std::min(lo, a[i][i] - r);
    hi = std::max(hi, a[i][i] + r);
  }
  lo -= 1;
  hi += 1;
  std::vector<double> out;
  for (std::size_t idx = 0; idx < n; ++idx) {
    double l = lo, h = hi;  // find x with count_below(x) crossing idx+1
    for (int it = 0; it < 200 && h - l > 1e-15 * (1 + std::abs(l) + std::abs(h)); ++it) {
      const double mid = 0.5 * (l + h);
      if (count_below(a, mid) >= int(idx) + 1)
        h = mid;
      else
        l = mid;
    }
    out.push_back(0.5 * (l + h));
  }
  return out;
}

// gcds of all nonempty subsets, by enumeration (sizes up to ~16).
inline std::set<int> subset_gcds(const std::vector<int>& values) {
  std::set<int> out;
  const std::size_t n = values.size();
  for (std::uint64_t mask = 1; mask < (std::uint64_t(1) << n); ++mask) {
    int g = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) g = std::gcd(g, values[i]);
    out.insert(g);
  }
  return out;
}

// Eigenvalues above k^2 in a plain list.
inline int count_above(const std::vector<double>& eig, double k) {
  return int(std::count_if(eig.begin(), eig.end(), [&](double v) { return v > k * k; }));
}

inline Dense random_symmetric(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Dense a(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) a[i][j] = a[j][i] = u(rng);
  return a;
}

inline std::vector<double> row_major(const Dense& a) {
  std::vector<double> out;
  for (const auto& r : a) out.insert(out.end(), r.begin(), r.end());
  return out;
}

// Random orthogonal matrix from Gram-Schmidt of a random matrix.
inline Dense random_orthogonal(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g;
  Dense q(n, std::vector<double>(n));
  for (auto& r : q)
    for (auto& v : r) v = g(rng);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      double d = 0;
      for (std::size_t k = 0; k < n; ++k) d += q[i][k] * q[j][k];
      for (std::size_t k = 0; k < n; ++k) q[i][k] -= d * q[j][k];
    }
    double nrm = 0;
    for (double v : q[i]) nrm += v * v;
    nrm = std::sqrt(nrm);
    for (double& v : q[i]) v /= nrm;
  }
  return q;
}

inline Dense conjugate(const Dense& q, const Dense& a) {
  const std::size_t n = a.size();
  Dense t(n, std::vector<double>(n, 0.0)), out(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) t[i][j] += q[i][k] * a[k][j];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) out[i][j] += t[i][k] * q[j][k];
  return out;
}

}  // namespace oracle
