#pragma once

// Closed-form equivariant gradient degrees of linear data.

#include <vector>

#include "equideg/linalg.hpp"
#include "equideg/reps.hpp"
#include "equideg/spectral.hpp"
#include "equideg/udring.hpp"

namespace equideg {

// An SO(2)-equivariant self-adjoint isomorphism L = diag(L_0, ..., L_r) on
// V = R[j_0,0] (+) R[j_1,k_1] (+) ..., summarised by the Morse index of each
// isotypic block. block_morse[i] pairs with rep.parts()[i].
struct LinearBlockData {
  RepDecomposition rep;
  std::vector<int> block_morse;

  friend bool operator==(const LinearBlockData&, const LinearBlockData&) = default;
};

// Block-diagonal concatenation; blocks of equal frequency are merged.
LinearBlockData direct_sum(const LinearBlockData& a, const LinearBlockData& b);

// (-1)^{m0} at SO(2), (-1)^{m0} * m_i / 2 at Z_{k_i}.
// Throws InvariantError on malformed data (size mismatch, m_i > dim, odd m_i
// on a k >= 1 block).
TomDieckElement lin_deg(const LinearBlockData& d);

// Degree of Id - L_A on a ball in the loop space; needs A nonresonant.
TomDieckElement deg_id_minus_LA(const SymmetricMatrix& a, double tol = kDefaultTol);
TomDieckElement deg_id_minus_LA(const SpectralData& s);

// (-1)^{n - m^-(A)}, the Brouwer index at infinity of -grad V for the
// built-in (bounded perturbation) class.
int ind_infinity(const SymmetricMatrix& a, std::size_t n, double tol = kDefaultTol);
int ind_infinity(const SpectralData& s, std::size_t n);

}  // namespace equideg
