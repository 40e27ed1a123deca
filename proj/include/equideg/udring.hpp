#pragma once

// The tom Dieck ring U(SO(2)) = Z (+) (+)_{k>=1} Z.
//
// An element carries one integer at the SO(2) coordinate and finitely many
// nonzero integers at the Z_k coordinates. Sum is coordinatewise; the product
// is (a0*b0, ..., a0*b_k + b0*a_k, ...). All arithmetic is overflow checked.

#include <cstdint>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <utility>

namespace equideg {

class TomDieckElement {
 public:
  using Coeffs = std::map<int, std::int64_t>;

  // Theta, the additive identity.
  TomDieckElement() = default;
  // Zero entries of `zk` are dropped; keys must be >= 1.
  TomDieckElement(std::int64_t so2, Coeffs zk);
  TomDieckElement(std::int64_t so2, std::initializer_list<std::pair<const int, std::int64_t>> zk)
      : TomDieckElement(so2, Coeffs(zk)) {}

  static TomDieckElement zero() { return {}; }
  static TomDieckElement unit() { return TomDieckElement(1, Coeffs{}); }

  std::int64_t so2() const noexcept { return so2_; }
  // Coordinate at Z_k, 0 when absent.
  std::int64_t zk(int k) const;
  const Coeffs& coeffs() const noexcept { return zk_; }
  bool is_zero() const noexcept { return so2_ == 0 && zk_.empty(); }

  friend bool operator==(const TomDieckElement&, const TomDieckElement&) = default;

  std::string to_string() const;

 private:
  std::int64_t so2_ = 0;
  Coeffs zk_;
};

TomDieckElement add(const TomDieckElement& a, const TomDieckElement& b);
TomDieckElement star(const TomDieckElement& a, const TomDieckElement& b);
TomDieckElement scalar_mul(std::int64_t g, const TomDieckElement& a);
// Left fold of star; the empty product is the unit.
TomDieckElement product(std::span<const TomDieckElement> factors);

inline TomDieckElement operator+(const TomDieckElement& a, const TomDieckElement& b) { return add(a, b); }
inline TomDieckElement operator-(const TomDieckElement& a, const TomDieckElement& b) {
  return add(a, scalar_mul(-1, b));
}
inline TomDieckElement operator*(const TomDieckElement& a, const TomDieckElement& b) { return star(a, b); }

}  // namespace equideg
