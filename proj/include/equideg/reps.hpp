#pragma once

// Finite-dimensional SO(2)-representations up to equivalence:
//   V ~ R[j_1,k_1] (+) ... (+) R[j_r,k_r],   k_1 < ... < k_r,
// where R[j,k] is j copies of the rotation representation of frequency k
// (k = 0 is the trivial j-dimensional summand).

#include <compare>
#include <initializer_list>
#include <set>
#include <string>
#include <vector>

#include "equideg/linalg.hpp"

namespace equideg {

struct RepPart {
  int multiplicity = 0;  // j >= 1
  int frequency = 0;     // k >= 0
  friend auto operator<=>(const RepPart&, const RepPart&) = default;
};

class RepDecomposition {
 public:
  RepDecomposition() = default;
  // Parts with equal frequency are merged (direct sum), zero multiplicities
  // dropped. Negative values throw InvariantError.
  explicit RepDecomposition(std::vector<RepPart> parts);
  RepDecomposition(std::initializer_list<RepPart> parts)
      : RepDecomposition(std::vector<RepPart>(parts)) {}

  const std::vector<RepPart>& parts() const noexcept { return parts_; }
  bool empty() const noexcept { return parts_.empty(); }
  int dimension() const;
  // Multiplicity of frequency k, 0 when absent.
  int multiplicity(int k) const;
  std::set<int> frequencies() const;
  bool has_trivial_part() const { return !parts_.empty() && parts_.front().frequency == 0; }

  friend bool operator==(const RepDecomposition&, const RepDecomposition&) = default;
  std::string to_string() const;

 private:
  std::vector<RepPart> parts_;
};

// Isotropy groups realised by nonzero vectors: SO(2) for the trivial summand,
// Z_g for every achievable gcd g of nonzero frequencies.
struct IsotropySet {
  bool so2 = false;
  std::set<int> cyclic;
  friend bool operator==(const IsotropySet&, const IsotropySet&) = default;
};

// Closure of a set of positive integers under pairwise gcd. Equals the set
// of gcds of all nonempty subsets.
std::set<int> gcd_closure(const std::set<int>& values);

IsotropySet isotropy_gcd_set(const RepDecomposition& rep);

// True iff some nonzero v in V and w in W share an isotropy group.
bool is_consistent(const RepDecomposition& v, const RepDecomposition& w);

// Kernel of Id - L_A on 2pi-periodic loops: (+)_k R[mu_A(k^2), k] over all
// k >= 0 with k^2 an eigenvalue of A (within tol * (1 + ||A||)).
RepDecomposition kernel_rep_at_infinity(const SymmetricMatrix& a, double tol = 1e-9);

}  // namespace equideg
