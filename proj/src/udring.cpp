#include "equideg/udring.hpp"

#include <sstream>

#include "equideg/checked.hpp"
#include "equideg/error.hpp"

namespace equideg {

TomDieckElement::TomDieckElement(std::int64_t so2, Coeffs zk) : so2_(so2) {
  for (auto& [k, v] : zk) {
    if (k < 1) throw InvariantError("Z_k coordinate with k < 1: " + std::to_string(k));
    if (v != 0) zk_.emplace(k, v);
  }
}

std::int64_t TomDieckElement::zk(int k) const {
  auto it = zk_.find(k);
  return it == zk_.end() ? 0 : it->second;
}

std::string TomDieckElement::to_string() const {
  std::ostringstream os;
  os << "(" << so2_ << "; {";
  bool first = true;
  for (const auto& [k, v] : zk_) {
    if (!first) os << ", ";
    os << k << ": " << v;
    first = false;
  }
  os << "})";
  return os.str();
}

TomDieckElement add(const TomDieckElement& a, const TomDieckElement& b) {
  TomDieckElement::Coeffs out = a.coeffs();
  for (const auto& [k, v] : b.coeffs()) {
    auto [it, inserted] = out.emplace(k, v);
    if (!inserted) it->second = checked::add(it->second, v);
  }
  return TomDieckElement(checked::add(a.so2(), b.so2()), std::move(out));
}

TomDieckElement star(const TomDieckElement& a, const TomDieckElement& b) {
  TomDieckElement::Coeffs out;
  for (const auto& [k, v] : a.coeffs()) out[k] = checked::mul(b.so2(), v);
  for (const auto& [k, v] : b.coeffs()) {
    const std::int64_t term = checked::mul(a.so2(), v);
    auto [it, inserted] = out.emplace(k, term);
    if (!inserted) it->second = checked::add(it->second, term);
  }
  return TomDieckElement(checked::mul(a.so2(), b.so2()), std::move(out));
}

TomDieckElement scalar_mul(std::int64_t g, const TomDieckElement& a) {
  TomDieckElement::Coeffs out;
  for (const auto& [k, v] : a.coeffs()) out.emplace(k, checked::mul(g, v));
  return TomDieckElement(checked::mul(g, a.so2()), std::move(out));
}

TomDieckElement product(std::span<const TomDieckElement> factors) {
  TomDieckElement acc = TomDieckElement::unit();
  for (const auto& f : factors) acc = star(acc, f);
  return acc;
}

}  // namespace equideg
