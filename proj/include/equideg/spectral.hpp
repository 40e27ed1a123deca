#pragma once

// Eigen-analysis of symmetric matrices and the integer spectral invariants
// used by the degree formulas: Morse index, j_k (eigenvalues above k^2
// counted with multiplicity), the resonant frequency set, and the K-set.

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "equideg/linalg.hpp"
#include "equideg/reps.hpp"

namespace equideg {

inline constexpr double kDefaultTol = 1e-9;

struct Eigenvalue {
  double value = 0.0;
  int multiplicity = 0;
  friend bool operator==(const Eigenvalue&, const Eigenvalue&) = default;
};

// Clustered spectrum. `tol` is the absolute clustering tolerance, i.e. the
// relative tolerance passed to eigen_sym times (1 + ||A||).
struct SpectralData {
  std::vector<Eigenvalue> eigenvalues;  // ascending, gaps > tol
  double tol = 0.0;

  std::size_t dimension() const;
  double max_value() const { return eigenvalues.empty() ? 0.0 : eigenvalues.back().value; }
  // mu_A(alpha): multiplicity of the cluster within tol of alpha, else 0.
  int multiplicity_of(double alpha) const;
  // Strictly positive part sigma_+(A), with multiplicities.
  std::vector<Eigenvalue> positive_part() const;

  friend bool operator==(const SpectralData&, const SpectralData&) = default;
};

SpectralData eigen_sym(const SymmetricMatrix& a, double tol = kDefaultTol);

// Sum of multiplicities of eigenvalues below -tol. With `strict`, an
// eigenvalue within tol of zero raises DegenerateSpectrumError.
int morse_index(const SpectralData& s, bool strict = false);

// Number of eigenvalues strictly greater than k^2. Resonant input (an
// eigenvalue within tol of k^2) raises DegenerateSpectrumError.
int j_k(const SpectralData& s, int k);
int j_k(const SymmetricMatrix& a, int k, double tol = kDefaultTol);

// {k >= 0 : k^2 in sigma(A)}.
std::set<int> resonant_frequencies(const SpectralData& s);
inline bool is_resonant(const SpectralData& s) { return !resonant_frequencies(s).empty(); }

// Union of the gcd closures of the nonzero resonant frequencies at the two
// endpoints. Empty when neither endpoint meets {k^2 : k >= 1}.
std::set<int> k_set(const SpectralData& s_minus, const SpectralData& s_plus);

// ---------------------------------------------------------------------------
// Parameter families

struct PolyTerm {
  int power = 0;
  double coefficient = 0.0;
  friend bool operator==(const PolyTerm&, const PolyTerm&) = default;
};

using Polynomial = std::vector<PolyTerm>;

double evaluate(const Polynomial& p, double x);
double derivative(const Polynomial& p, double x);

// A(lambda) with polynomial entries. Only the upper triangle is stored.
class MatrixFamily {
 public:
  MatrixFamily() = default;
  explicit MatrixFamily(std::size_t n) : n_(n) {}

  static MatrixFamily constant(const SymmetricMatrix& a);

  std::size_t size() const noexcept { return n_; }
  // Sets entry (i,j) and its mirror. Replaces any previous polynomial.
  void set_entry(std::size_t i, std::size_t j, Polynomial p);
  const Polynomial* entry(std::size_t i, std::size_t j) const;
  const std::map<std::pair<std::size_t, std::size_t>, Polynomial>& entries() const { return entries_; }

  SymmetricMatrix at(double lambda) const;
  SymmetricMatrix derivative_at(double lambda) const;
  // lambda^p * A(lambda).
  MatrixFamily times_power(int p) const;
  bool is_constant() const;

  friend bool operator==(const MatrixFamily&, const MatrixFamily&) = default;

 private:
  std::size_t n_ = 0;
  std::map<std::pair<std::size_t, std::size_t>, Polynomial> entries_;
};

// ---------------------------------------------------------------------------
// Resonance scanning

struct ResonancePoint {
  double lambda0 = 0.0;
  std::set<int> frequencies;  // k >= 0 with k^2 in sigma(A(lambda0))
  RepDecomposition kernel_rep;
  bool det_nonzero = true;
  // No j_k changes across lambda0 for any k: the spectrum only touches k^2.
  bool tangential = false;

  friend bool operator==(const ResonancePoint&, const ResonancePoint&) = default;
};

struct ScanOptions {
  int grid = 512;  // number of subintervals
  double tol = kDefaultTol;
};

struct ScanResult {
  std::vector<ResonancePoint> interior;  // ascending lambda
  std::vector<ResonancePoint> at_lower;  // resonances at lambda = lo
  std::vector<ResonancePoint> at_upper;
  std::vector<std::string> warnings;
  int k_max = 0;

  bool endpoints_resonant() const { return !at_lower.empty() || !at_upper.empty(); }
};

ScanResult scan_resonances(const MatrixFamily& family, double lo, double hi, const ScanOptions& opts = {});

// Resonance data of A(lambda) at a given lambda, without scanning.
ResonancePoint resonance_at(const MatrixFamily& family, double lambda, double tol = kDefaultTol);

}  // namespace equideg
