#pragma once

// Small dense symmetric matrices and a cyclic Jacobi eigensolver.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace equideg {

class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(std::size_t n) : n_(n), a_(n * n, 0.0) {}
  // Row-major input; symmetrized as (A + A^T)/2 so that entries (i,j) and
  // (j,i) are bitwise equal.
  SymmetricMatrix(std::size_t n, std::span<const double> row_major);
  SymmetricMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static SymmetricMatrix diagonal(std::span<const double> d);
  static SymmetricMatrix diagonal(std::initializer_list<double> d) {
    return diagonal(std::span<const double>(d.begin(), d.size()));
  }
  static SymmetricMatrix identity(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  // Writes both (i,j) and (j,i).
  void set(std::size_t i, std::size_t j, double v) {
    a_[i * n_ + j] = v;
    a_[j * n_ + i] = v;
  }
  std::span<const double> data() const noexcept { return a_; }

  // A + c*I
  SymmetricMatrix shifted(double c) const;
  SymmetricMatrix scaled(double c) const;
  // Frobenius norm.
  double norm() const;
  // y = A x
  void apply(std::span<const double> x, std::span<double> y) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

struct EigenDecomposition {
  std::vector<double> values;   // ascending
  std::vector<double> vectors;  // column j (vectors[i*n + j]) pairs with values[j]
  std::size_t n = 0;
  int sweeps = 0;

  std::vector<double> vector(std::size_t j) const;
};

// Cyclic Jacobi rotations until the off-diagonal mass is below eps*||A||.
// Throws ConvergenceError after `max_sweeps`.
EigenDecomposition jacobi_eigen(const SymmetricMatrix& a, int max_sweeps = 100);

// det(A) by Gaussian elimination with partial pivoting.
double determinant(const SymmetricMatrix& a);

}  // namespace equideg
