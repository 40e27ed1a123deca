#include "equideg/reps.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

#include "equideg/error.hpp"
#include "equideg/spectral.hpp"

namespace equideg {

RepDecomposition::RepDecomposition(std::vector<RepPart> parts) {
  std::map<int, int> merged;
  for (const auto& p : parts) {
    if (p.multiplicity < 0 || p.frequency < 0)
      throw InvariantError("representation part with negative multiplicity or frequency");
    if (p.multiplicity == 0) continue;
    merged[p.frequency] += p.multiplicity;
  }
  for (const auto& [k, j] : merged) parts_.push_back({j, k});
}

int RepDecomposition::dimension() const {
  int d = 0;
  for (const auto& p : parts_) d += p.frequency == 0 ? p.multiplicity : 2 * p.multiplicity;
  return d;
}

int RepDecomposition::multiplicity(int k) const {
  for (const auto& p : parts_)
    if (p.frequency == k) return p.multiplicity;
  return 0;
}

std::set<int> RepDecomposition::frequencies() const {
  std::set<int> out;
  for (const auto& p : parts_) out.insert(p.frequency);
  return out;
}

std::string RepDecomposition::to_string() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (i) os << ", ";
    os << "R[" << parts_[i].multiplicity << "," << parts_[i].frequency << "]";
  }
  os << "]";
  return os.str();
}

std::set<int> gcd_closure(const std::set<int>& values) {
  std::set<int> closed;
  for (int v : values)
    if (v > 0) closed.insert(v);
  // Saturate: a new gcd can only come from pairing with an existing member.
  std::vector<int> frontier(closed.begin(), closed.end());
  while (!frontier.empty()) {
    std::vector<int> next;
    for (int f : frontier) {
      for (int c : std::vector<int>(closed.begin(), closed.end())) {
        const int g = std::gcd(f, c);
        if (closed.insert(g).second) next.push_back(g);
      }
    }
    frontier = std::move(next);
  }
  return closed;
}

IsotropySet isotropy_gcd_set(const RepDecomposition& rep) {
  IsotropySet out;
  std::set<int> nonzero;
  for (const auto& p : rep.parts()) {
    if (p.frequency == 0)
      out.so2 = true;
    else
      nonzero.insert(p.frequency);
  }
  out.cyclic = gcd_closure(nonzero);
  return out;
}

bool is_consistent(const RepDecomposition& v, const RepDecomposition& w) {
  const IsotropySet a = isotropy_gcd_set(v);
  const IsotropySet b = isotropy_gcd_set(w);
  if (a.so2 && b.so2) return true;
  return std::any_of(a.cyclic.begin(), a.cyclic.end(), [&](int g) { return b.cyclic.count(g) > 0; });
}

RepDecomposition kernel_rep_at_infinity(const SymmetricMatrix& a, double tol) {
  const SpectralData s = eigen_sym(a, tol);
  std::vector<RepPart> parts;
  for (int k : resonant_frequencies(s)) parts.push_back({s.multiplicity_of(double(k) * k), k});
  return RepDecomposition(std::move(parts));
}

}  // namespace equideg
