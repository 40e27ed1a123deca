#include "equideg/eqdeg.hpp"

#include <map>
#include <sstream>

#include "equideg/checked.hpp"
#include "equideg/error.hpp"

namespace equideg {

LinearBlockData direct_sum(const LinearBlockData& a, const LinearBlockData& b) {
  std::map<int, std::pair<int, int>> merged;  // k -> (multiplicity, morse)
  for (const LinearBlockData* d : {&a, &b}) {
    if (d->rep.parts().size() != d->block_morse.size())
      throw InvariantError("direct_sum: block_morse does not match rep parts");
    for (std::size_t i = 0; i < d->block_morse.size(); ++i) {
      auto& slot = merged[d->rep.parts()[i].frequency];
      slot.first += d->rep.parts()[i].multiplicity;
      slot.second += d->block_morse[i];
    }
  }
  std::vector<RepPart> parts;
  std::vector<int> morse;
  for (const auto& [k, jm] : merged) {
    parts.push_back({jm.first, k});
    morse.push_back(jm.second);
  }
  return {RepDecomposition(std::move(parts)), std::move(morse)};
}

TomDieckElement lin_deg(const LinearBlockData& d) {
  const auto& parts = d.rep.parts();
  if (parts.size() != d.block_morse.size()) throw InvariantError("lin_deg: block_morse does not match rep parts");
  int m0 = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const int m = d.block_morse[i];
    const int dim = parts[i].frequency == 0 ? parts[i].multiplicity : 2 * parts[i].multiplicity;
    if (m < 0 || m > dim) {
      std::ostringstream os;
      os << "lin_deg: Morse index " << m << " outside [0, " << dim << "] on block k=" << parts[i].frequency;
      throw InvariantError(os.str());
    }
    if (parts[i].frequency == 0) {
      m0 = m;
    } else if (m % 2 != 0) {
      std::ostringstream os;
      os << "lin_deg: odd Morse index " << m << " on complex block k=" << parts[i].frequency;
      throw InvariantError(os.str());
    }
  }
  const std::int64_t sign = checked::sign_power(m0);
  std::map<int, std::int64_t> zk;
  for (std::size_t i = 0; i < parts.size(); ++i)
    if (parts[i].frequency != 0) zk[parts[i].frequency] = sign * (d.block_morse[i] / 2);
  return TomDieckElement(sign, std::move(zk));
}

TomDieckElement deg_id_minus_LA(const SpectralData& s) {
  const std::set<int> res = resonant_frequencies(s);
  if (!res.empty()) {
    const double k = *res.begin();
    throw DegenerateSpectrumError("deg_id_minus_LA: A is resonant (k=" + std::to_string(*res.begin()) + ")", k * k);
  }
  const std::int64_t sign = checked::sign_power(j_k(s, 0));
  std::map<int, std::int64_t> zk;
  for (int k = 1;; ++k) {
    const int jk = j_k(s, k);
    if (jk == 0) break;
    zk[k] = sign * jk;
  }
  return TomDieckElement(sign, std::move(zk));
}

TomDieckElement deg_id_minus_LA(const SymmetricMatrix& a, double tol) { return deg_id_minus_LA(eigen_sym(a, tol)); }

int ind_infinity(const SpectralData& s, std::size_t n) {
  return int(checked::sign_power(std::int64_t(n) - morse_index(s)));
}

int ind_infinity(const SymmetricMatrix& a, std::size_t n, double tol) { return ind_infinity(eigen_sym(a, tol), n); }

}  // namespace equideg
