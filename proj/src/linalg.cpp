#include "equideg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "equideg/error.hpp"

namespace equideg {

SymmetricMatrix::SymmetricMatrix(std::size_t n, std::span<const double> row_major)
    : n_(n), a_(n * n) {
  if (row_major.size() != n * n) throw InvariantError("matrix data size does not match dimension");
  for (std::size_t i = 0; i < n; ++i) {
    a_[i * n + i] = row_major[i * n + i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 0.5 * (row_major[i * n + j] + row_major[j * n + i]);
      a_[i * n + j] = v;
      a_[j * n + i] = v;
    }
  }
}

SymmetricMatrix::SymmetricMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<double> flat;
  const std::size_t n = rows.size();
  for (const auto& r : rows) {
    if (r.size() != n) throw InvariantError("matrix rows must be square");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  *this = SymmetricMatrix(n, flat);
}

SymmetricMatrix SymmetricMatrix::diagonal(std::span<const double> d) {
  SymmetricMatrix m(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m.a_[i * d.size() + i] = d[i];
  return m;
}

SymmetricMatrix SymmetricMatrix::identity(std::size_t n) {
  std::vector<double> ones(n, 1.0);
  return diagonal(ones);
}

SymmetricMatrix SymmetricMatrix::shifted(double c) const {
  SymmetricMatrix m = *this;
  for (std::size_t i = 0; i < n_; ++i) m.a_[i * n_ + i] += c;
  return m;
}

SymmetricMatrix SymmetricMatrix::scaled(double c) const {
  SymmetricMatrix m = *this;
  for (auto& v : m.a_) v *= c;
  return m;
}

double SymmetricMatrix::norm() const {
  double s = 0.0;
  for (double v : a_) s += v * v;
  return std::sqrt(s);
}

void SymmetricMatrix::apply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) s += a_[i * n_ + j] * x[j];
    y[i] = s;
  }
}

std::vector<double> EigenDecomposition::vector(std::size_t j) const {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = vectors[i * n + j];
  return v;
}

EigenDecomposition jacobi_eigen(const SymmetricMatrix& m, int max_sweeps) {
  const std::size_t n = m.size();
  std::vector<double> a(m.data().begin(), m.data().end());
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  const double scale = m.norm();
  const double target = std::numeric_limits<double>::epsilon() * scale;
  auto off = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += a[i * n + j] * a[i * n + j];
    return std::sqrt(2.0 * s);
  };

  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    if (off() <= target) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];
        // Rotation angle from the standard stable formulas.
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k];
          const double aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        a[p * n + q] = 0.0;
        a[q * n + p] = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p];
          const double vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }
  if (off() > target * 16.0)
    throw ConvergenceError("Jacobi eigensolver did not converge in " + std::to_string(max_sweeps) +
                           " sweeps (off-diagonal norm " + std::to_string(off()) + ")");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a[i * n + i] < a[j * n + j]; });

  EigenDecomposition out;
  out.n = n;
  out.sweeps = sweep;
  out.values.resize(n);
  out.vectors.resize(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a[order[j] * n + order[j]];
    for (std::size_t i = 0; i < n; ++i) out.vectors[i * n + j] = v[i * n + order[j]];
  }
  return out;
}

double determinant(const SymmetricMatrix& m) {
  const std::size_t n = m.size();
  std::vector<double> a(m.data().begin(), m.data().end());
  double det = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r * n + c]) > std::abs(a[piv * n + c])) piv = r;
    if (a[piv * n + c] == 0.0) return 0.0;
    if (piv != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[c * n + k], a[piv * n + k]);
      det = -det;
    }
    const double d = a[c * n + c];
    det *= d;
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r * n + c] / d;
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
    }
  }
  return det;
}

}  // namespace equideg
