#include "equideg/bifurcation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "equideg/checked.hpp"
#include "equideg/eqdeg.hpp"
#include "equideg/error.hpp"

namespace equideg {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

int frequency_bound(const SpectralData& a, const SpectralData& b) {
  const double m = std::max({a.max_value(), b.max_value(), 0.0});
  return int(std::ceil(std::sqrt(m))) + 1;
}

struct Endpoints {
  SpectralData minus, plus;
};

Endpoints endpoint_spectra(const ProblemSpec& p, double lm, double lp, double tol) {
  return {eigen_sym(p.linear_part(lm), tol), eigen_sym(p.linear_part(lp), tol)};
}

std::string set_string(const std::set<int>& s) {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (int k : s) {
    os << (first ? "" : ", ") << k;
    first = false;
  }
  os << "}";
  return os.str();
}

}  // namespace

BifIndex bif_index_full(const ProblemSpec& p, double lm, double lp, double tol) {
  const Endpoints e = endpoint_spectra(p, lm, lp, tol);
  const std::set<int> rm = resonant_frequencies(e.minus), rp = resonant_frequencies(e.plus);
  BifIndex out;
  if (rm.empty() && rp.empty()) {
    out.value = add(deg_id_minus_LA(e.plus), scalar_mul(-1, deg_id_minus_LA(e.minus)));
    return out;
  }
  out.resonant_endpoints = true;
  const std::int64_t ind_m = p.index_at_infinity(lm, tol), ind_p = p.index_at_infinity(lp, tol);
  for (const std::set<int>* r : {&rm, &rp})
    for (int k : *r)
      if (k >= 1) out.undefined.insert(k);
  std::map<int, std::int64_t> zk;
  const int kmax = frequency_bound(e.minus, e.plus);
  for (int k = 1; k <= kmax; ++k) {
    if (out.undefined.count(k)) continue;
    zk[k] = checked::sub(checked::mul(ind_p, j_k(e.plus, k)), checked::mul(ind_m, j_k(e.minus, k)));
  }
  out.value = TomDieckElement(checked::sub(ind_p, ind_m), std::move(zk));
  return out;
}

TomDieckElement bif_index(const ProblemSpec& p, double lm, double lp, double tol) {
  return bif_index_full(p, lm, lp, tol).value;
}

std::int64_t bif_index_ls(const ProblemSpec& p, double lm, double lp, double tol) {
  return bif_index(p, lm, lp, tol).so2();
}

std::string criterion_name(Criterion c) {
  switch (c) {
    case Criterion::none: return "none";
    case Criterion::eqcont1_i: return "eqcont1(i)";
    case Criterion::eqcont1_ii: return "eqcont1(ii)";
    case Criterion::eqcont2_i: return "eqcont2(i)";
    case Criterion::eqcont2_ii: return "eqcont2(ii)";
    case Criterion::eqcont3: return "eqcont3";
  }
  return "none";
}

Criterion criterion_from_name(const std::string& s) {
  for (Criterion c : {Criterion::none, Criterion::eqcont1_i, Criterion::eqcont1_ii, Criterion::eqcont2_i,
                      Criterion::eqcont2_ii, Criterion::eqcont3})
    if (criterion_name(c) == s) return c;
  throw ParseError("unknown criterion '" + s + "'", 0);
}

Verdict check_eqcont1(const ProblemSpec& p, double lm, double lp, double tol) {
  const int ind_m = p.index_at_infinity(lm, tol), ind_p = p.index_at_infinity(lp, tol);
  const Endpoints e = endpoint_spectra(p, lm, lp, tol);
  Verdict v;
  v.kset = k_set(e.minus, e.plus);
  if (ind_m != ind_p) {
    v.criterion = Criterion::eqcont1_i;
    v.explanation = "ind(-grad V, infinity) changes from " + std::to_string(ind_m) + " to " + std::to_string(ind_p);
    return v;
  }
  if (ind_p == 0) {
    v.explanation = "equal indices at infinity are zero";
    return v;
  }
  const int kmax = frequency_bound(e.minus, e.plus);
  for (int k = 1; k <= kmax; ++k) {
    if (v.kset.count(k)) continue;
    const int jm = j_k(e.minus, k), jp = j_k(e.plus, k);
    if (jm != jp) {
      v.criterion = Criterion::eqcont1_ii;
      v.witness_k = k;
      v.explanation = "ind = " + std::to_string(ind_p) + " at both ends; j_" + std::to_string(k) + " changes from " +
                      std::to_string(jm) + " to " + std::to_string(jp) + ", K = " + set_string(v.kset);
      return v;
    }
  }
  v.explanation = "indices equal and j_k agree for all k outside K = " + set_string(v.kset);
  return v;
}

Verdict check_eqcont2(const ProblemSpec& p, double lm, double lp, const ScanOptions& opts) {
  const ScanResult scan = scan_resonances(p.effective_family(), lm, lp, opts);
  if (scan.endpoints_resonant() || scan.interior.size() != 1) {
    std::ostringstream os;
    os << "eqcont2 needs exactly one interior resonance and nonresonant endpoints; found " << scan.interior.size()
       << " interior";
    for (const auto& r : scan.interior)
      os << " [lambda=" << fmt(r.lambda0) << " k=" << set_string(r.frequencies) << (r.tangential ? " tangential" : "")
         << "]";
    if (!scan.at_lower.empty()) os << "; resonant at lambda-=" << fmt(lm);
    if (!scan.at_upper.empty()) os << "; resonant at lambda+=" << fmt(lp);
    throw PreconditionError(os.str());
  }
  const Endpoints e = endpoint_spectra(p, lm, lp, opts.tol);
  Verdict v;
  v.lambda0 = scan.interior.front().lambda0;
  const int j0m = j_k(e.minus, 0), j0p = j_k(e.plus, 0);
  if ((j0m % 2) != (j0p % 2)) {
    v.criterion = Criterion::eqcont2_i;
    v.explanation = "(-1)^{j_0} changes (j_0: " + std::to_string(j0m) + " -> " + std::to_string(j0p) + ")";
    return v;
  }
  const int kmax = frequency_bound(e.minus, e.plus);
  for (int k = 1; k <= kmax; ++k) {
    const int jm = j_k(e.minus, k), jp = j_k(e.plus, k);
    if (jm != jp) {
      v.criterion = Criterion::eqcont2_ii;
      v.witness_k = k;
      v.explanation = "j_" + std::to_string(k) + " changes from " + std::to_string(jm) + " to " + std::to_string(jp) +
                      "; C meets infinity at lambda0=" + fmt(*v.lambda0);
      return v;
    }
  }
  v.explanation = "j_k agree at both ends for every k";
  return v;
}

Eqcont3Result eqcont3_points(const ProblemSpec& p, double lo, double hi, double tol) {
  if (!p.scaled) throw PreconditionError("eqcont3_points needs a scaled problem");
  if (!(0 < lo && lo < hi)) throw PreconditionError("eqcont3 window must satisfy 0 < lo < hi");
  const SymmetricMatrix a = p.family.at(0.0);
  const SpectralData s = eigen_sym(a, tol);
  Eqcont3Result out;
  const std::vector<Eigenvalue> pos = s.positive_part();
  if (pos.empty()) return out;
  const std::int64_t ind = p.index_at_infinity(0.0, tol);

  struct Raw {
    double lambda;
    int k;
    Eigenvalue alpha;
  };
  std::vector<Raw> raw;
  for (const auto& al : pos) {
    if (al.value <= 1e-6 * (1 + a.norm()))
      out.warnings.push_back("eigenvalue " + fmt(al.value) + " is close to 0: points k/sqrt(alpha) accumulate");
    const double r = std::sqrt(al.value);
    const int kfirst = std::max(1, int(std::ceil(lo * r - 1e-9)));
    const int klast = int(std::floor(hi * r + 1e-9));
    if (klast - kfirst > 100000) throw PreconditionError("eqcont3 window contains too many points");
    for (int k = kfirst; k <= klast; ++k) {
      double l = k / r;
      if (std::abs(l - lo) <= 1e-12 * lo) l = lo;
      if (std::abs(l - hi) <= 1e-12 * hi) l = hi;
      if (l >= lo && l <= hi) raw.push_back({l, k, al});
    }
  }
  std::sort(raw.begin(), raw.end(), [](const Raw& x, const Raw& y) {
    return x.lambda != y.lambda ? x.lambda < y.lambda : x.k < y.k;
  });
  const double merge = std::max(1e-9, 1e3 * tol);
  for (const auto& r : raw) {
    if (!out.points.empty() && std::abs(out.points.back().lambda0 - r.lambda) <= merge * (1 + r.lambda)) {
      auto& pt = out.points.back();
      pt.merged = true;
      pt.bif_zk0 = checked::add(pt.bif_zk0, checked::mul(ind, r.alpha.multiplicity));
      pt.contributions.push_back({r.k, r.alpha.value, r.alpha.multiplicity});
      continue;
    }
    Eqcont3Point pt;
    pt.lambda0 = r.lambda;
    pt.k0 = r.k;
    pt.alpha0 = r.alpha.value;
    pt.bif_zk0 = checked::mul(ind, r.alpha.multiplicity);
    pt.contributions.push_back({r.k, r.alpha.value, r.alpha.multiplicity});
    out.points.push_back(std::move(pt));
  }
  for (const auto& pt : out.points)
    if (pt.merged)
      out.warnings.push_back("lambda0=" + fmt(pt.lambda0) + " arises from several (k, alpha); review merged point");
  return out;
}

std::vector<double> PeriodSet::periods() const {
  std::vector<double> out;
  for (int g : divisors) out.push_back(2 * std::numbers::pi / g);
  if (includes_zero) out.push_back(0.0);
  return out;
}

std::string PeriodSet::to_string() const {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (int g : divisors) {
    os << (first ? "" : ", ");
    first = false;
    if (g == 1)
      os << "2pi";
    else if (g == 2)
      os << "pi";
    else
      os << "2pi/" << g;
  }
  if (includes_zero) os << (first ? "" : ", ") << "0";
  os << "}";
  return os.str();
}

PeriodSet predict_periods(const ResonancePoint& r) {
  PeriodSet out;
  std::set<int> nonzero;
  for (int k : r.frequencies) {
    if (k == 0)
      out.includes_zero = true;
    else
      nonzero.insert(k);
  }
  out.divisors = gcd_closure(nonzero);
  return out;
}

ConsistencyVerdict consistency_check(const RepDecomposition& kernel_at_point, const RepDecomposition& kernel_at_infinity) {
  ConsistencyVerdict v;
  v.consistent = is_consistent(kernel_at_point, kernel_at_infinity);
  v.hypothesis_holds = !v.consistent;
  const IsotropySet a = isotropy_gcd_set(kernel_at_point), b = isotropy_gcd_set(kernel_at_infinity);
  auto describe = [](const IsotropySet& s) {
    std::string out = s.so2 ? "SO(2)" : "";
    for (int g : s.cyclic) out += (out.empty() ? "" : ",") + std::string("Z_") + std::to_string(g);
    return "{" + out + "}";
  };
  v.explanation = "isotropy " + describe(a) + " vs " + describe(b) +
                  (v.consistent ? ": shared isotropy, hypothesis fails" : ": disjoint isotropy, hypothesis holds");
  return v;
}

BifurcationReport analyze(const ProblemSpec& p, double lm, double lp, const AnalyzeOptions& opts) {
  p.validate();
  if (!(lm < lp)) throw PreconditionError("interval needs lambda- < lambda+");
  BifurcationReport rep;
  rep.problem = p.name;
  rep.dimension = p.n;
  rep.scaled = p.scaled;
  rep.lambda_minus = lm;
  rep.lambda_plus = lp;
  rep.tol = opts.tol;
  rep.grid = opts.grid;

  const Endpoints e = endpoint_spectra(p, lm, lp, opts.tol);
  rep.spectrum_minus = e.minus;
  rep.spectrum_plus = e.plus;
  rep.kset = k_set(e.minus, e.plus);
  rep.hypothesis_a_kset_empty = rep.kset.empty();
  rep.hypothesis_b_bounded_zeros = p.is_builtin_class() ? "builtin" : "asserted-by-user";

  const ScanOptions scan_opts{opts.grid, opts.tol};
  const ScanResult scan = scan_resonances(p.effective_family(), lm, lp, scan_opts);
  rep.resonances = scan.interior;
  rep.endpoint_resonances = scan.at_lower;
  rep.endpoint_resonances.insert(rep.endpoint_resonances.end(), scan.at_upper.begin(), scan.at_upper.end());
  rep.warnings = scan.warnings;
  for (const auto& r : rep.resonances) rep.predicted_periods.push_back(predict_periods(r));

  const bool index_known = p.index_rule.kind != IndexRule::Kind::unavailable;
  if (index_known) {
    try {
      rep.ind_minus = p.index_at_infinity(lm, opts.tol);
      rep.ind_plus = p.index_at_infinity(lp, opts.tol);
    } catch (const MissingIndexError& err) {
      rep.ind_minus.reset();
      rep.ind_plus.reset();
      rep.warnings.push_back(err.what());
    }
  }
  try {
    const BifIndex b = bif_index_full(p, lm, lp, opts.tol);
    rep.bif = b.value;
    rep.bif_undefined = b.undefined;
    rep.bif_ls = b.value.so2();
  } catch (const MissingIndexError& err) {
    rep.warnings.push_back(std::string("bifurcation index unavailable: ") + err.what());
  }

  if (p.scaled) {
    if (lm > 0) {
      const Eqcont3Result r3 = eqcont3_points(p, lm, lp, opts.tol);
      rep.eqcont3 = r3.points;
      rep.warnings.insert(rep.warnings.end(), r3.warnings.begin(), r3.warnings.end());
      for (const auto& pt : r3.points) {
        if (pt.bif_zk0 == 0) continue;
        rep.verdict.criterion = Criterion::eqcont3;
        rep.verdict.witness_k = pt.k0;
        rep.verdict.lambda0 = pt.lambda0;
        rep.verdict.alpha0 = pt.alpha0;
        rep.verdict.explanation = "Bif_{Z_" + std::to_string(pt.k0) + "} = " + std::to_string(pt.bif_zk0) +
                                  " at lambda0 = " + fmt(pt.lambda0);
        break;
      }
    } else {
      rep.warnings.push_back("eqcont3 needs a window inside (0, infinity)");
    }
  } else {
    try {
      rep.verdict = check_eqcont2(p, lm, lp, scan_opts);
    } catch (const PreconditionError& err) {
      rep.warnings.push_back(std::string("eqcont2 not applicable: ") + err.what());
    }
    if (!rep.verdict.holds() && rep.ind_minus && rep.ind_plus) rep.verdict = check_eqcont1(p, lm, lp, opts.tol);
  }
  if (rep.verdict.holds() && (!rep.bif || rep.bif->is_zero()))
    throw InvariantError("criterion " + criterion_name(rep.verdict.criterion) + " fired with zero bifurcation index");

  for (const auto& cp : opts.critical)
    for (const auto& r : rep.resonances)
      rep.consistency.push_back({cp.label, r.lambda0, consistency_check(cp.kernel, r.kernel_rep)});
  return rep;
}

}  // namespace equideg
