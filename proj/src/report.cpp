#include "equideg/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "equideg/error.hpp"
#include "json.hpp"

namespace equideg {

namespace {

using nlohmann::json;

json opt_int(const std::optional<std::int64_t>& v) { return v ? json(*v) : json(nullptr); }
json opt_double(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json element_json(const TomDieckElement& e) {
  json zk = json::object();
  for (const auto& [k, c] : e.coeffs()) zk[std::to_string(k)] = c;
  return {{"so2", e.so2()}, {"zk", zk}};
}

TomDieckElement element_from(const json& j) {
  TomDieckElement::Coeffs zk;
  for (const auto& [k, c] : j.at("zk").items()) zk[std::stoi(k)] = c.get<std::int64_t>();
  return {j.at("so2").get<std::int64_t>(), zk};
}

json rep_json(const RepDecomposition& r) {
  json a = json::array();
  for (const auto& p : r.parts()) a.push_back({p.multiplicity, p.frequency});
  return a;
}

RepDecomposition rep_from(const json& j) {
  std::vector<RepPart> parts;
  for (const auto& p : j) parts.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
  return RepDecomposition(parts);
}

json spectrum_json(const SpectralData& s) {
  json ev = json::array();
  for (const auto& e : s.eigenvalues) ev.push_back({e.value, e.multiplicity});
  return {{"tol", s.tol}, {"eigenvalues", ev}};
}

SpectralData spectrum_from(const json& j) {
  SpectralData s;
  s.tol = j.at("tol").get<double>();
  for (const auto& e : j.at("eigenvalues")) s.eigenvalues.push_back({e.at(0).get<double>(), e.at(1).get<int>()});
  return s;
}

json resonance_json(const ResonancePoint& r) {
  return {{"lambda0", r.lambda0},
          {"frequencies", r.frequencies},
          {"kernel_rep", rep_json(r.kernel_rep)},
          {"det_nonzero", r.det_nonzero},
          {"tangential", r.tangential}};
}

ResonancePoint resonance_from(const json& j) {
  ResonancePoint r;
  r.lambda0 = j.at("lambda0").get<double>();
  r.frequencies = j.at("frequencies").get<std::set<int>>();
  r.kernel_rep = rep_from(j.at("kernel_rep"));
  r.det_nonzero = j.at("det_nonzero").get<bool>();
  r.tangential = j.at("tangential").get<bool>();
  return r;
}

std::vector<ResonancePoint> resonances_from(const json& j) {
  std::vector<ResonancePoint> out;
  for (const auto& r : j) out.push_back(resonance_from(r));
  return out;
}

json resonances_json(const std::vector<ResonancePoint>& v) {
  json a = json::array();
  for (const auto& r : v) a.push_back(resonance_json(r));
  return a;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string serialize_report(const BifurcationReport& r, int indent) {
  json j;
  j["format_version"] = r.format_version;
  j["problem"] = r.problem;
  j["dimension"] = r.dimension;
  j["scaled"] = r.scaled;
  j["interval"] = {r.lambda_minus, r.lambda_plus};
  j["tol"] = r.tol;
  j["grid"] = r.grid;
  j["spectrum_minus"] = spectrum_json(r.spectrum_minus);
  j["spectrum_plus"] = spectrum_json(r.spectrum_plus);
  j["kset"] = r.kset;
  j["ind_minus"] = r.ind_minus ? json(*r.ind_minus) : json(nullptr);
  j["ind_plus"] = r.ind_plus ? json(*r.ind_plus) : json(nullptr);
  j["bif"] = r.bif ? element_json(*r.bif) : json(nullptr);
  j["bif_text"] = r.bif ? json(r.bif->to_string()) : json(nullptr);
  j["bif_undefined"] = r.bif_undefined;
  j["bif_ls"] = opt_int(r.bif_ls);
  j["verdict"] = {{"criterion", criterion_name(r.verdict.criterion)},
                  {"holds", r.verdict.holds()},
                  {"witness_k", r.verdict.witness_k},
                  {"kset", r.verdict.kset},
                  {"lambda0", opt_double(r.verdict.lambda0)},
                  {"alpha0", opt_double(r.verdict.alpha0)},
                  {"explanation", r.verdict.explanation}};
  j["resonances"] = resonances_json(r.resonances);
  j["endpoint_resonances"] = resonances_json(r.endpoint_resonances);
  json periods = json::array();
  for (const auto& p : r.predicted_periods)
    periods.push_back({{"includes_zero", p.includes_zero}, {"divisors", p.divisors}, {"text", p.to_string()}});
  j["predicted_periods"] = periods;
  json e3 = json::array();
  for (const auto& p : r.eqcont3) {
    json contrib = json::array();
    for (const auto& c : p.contributions) contrib.push_back({{"k", c.k}, {"alpha", c.alpha}, {"multiplicity", c.multiplicity}});
    e3.push_back({{"lambda0", p.lambda0},
                  {"k0", p.k0},
                  {"alpha0", p.alpha0},
                  {"bif_zk0", p.bif_zk0},
                  {"merged", p.merged},
                  {"contributions", contrib}});
  }
  j["eqcont3"] = e3;
  json cons = json::array();
  for (const auto& c : r.consistency)
    cons.push_back({{"label", c.label},
                    {"lambda0", c.lambda0},
                    {"consistent", c.verdict.consistent},
                    {"hypothesis_holds", c.verdict.hypothesis_holds},
                    {"explanation", c.verdict.explanation}});
  j["consistency"] = cons;
  j["hypotheses"] = {{"a_kset_empty", r.hypothesis_a_kset_empty}, {"b_bounded_zeros", r.hypothesis_b_bounded_zeros}};
  j["warnings"] = r.warnings;
  return j.dump(indent);
}

BifurcationReport parse_report(std::string_view text) {
  try {
    const json j = json::parse(text);
    BifurcationReport r;
    r.format_version = j.at("format_version").get<int>();
    if (r.format_version != 1) throw ParseError("unsupported report format_version", 0);
    r.problem = j.at("problem").get<std::string>();
    r.dimension = j.at("dimension").get<std::size_t>();
    r.scaled = j.at("scaled").get<bool>();
    r.lambda_minus = j.at("interval").at(0).get<double>();
    r.lambda_plus = j.at("interval").at(1).get<double>();
    r.tol = j.at("tol").get<double>();
    r.grid = j.at("grid").get<int>();
    r.spectrum_minus = spectrum_from(j.at("spectrum_minus"));
    r.spectrum_plus = spectrum_from(j.at("spectrum_plus"));
    r.kset = j.at("kset").get<std::set<int>>();
    if (!j.at("ind_minus").is_null()) r.ind_minus = j.at("ind_minus").get<int>();
    if (!j.at("ind_plus").is_null()) r.ind_plus = j.at("ind_plus").get<int>();
    if (!j.at("bif").is_null()) r.bif = element_from(j.at("bif"));
    r.bif_undefined = j.at("bif_undefined").get<std::set<int>>();
    if (!j.at("bif_ls").is_null()) r.bif_ls = j.at("bif_ls").get<std::int64_t>();
    const json& v = j.at("verdict");
    r.verdict.criterion = criterion_from_name(v.at("criterion").get<std::string>());
    r.verdict.witness_k = v.at("witness_k").get<int>();
    r.verdict.kset = v.at("kset").get<std::set<int>>();
    if (!v.at("lambda0").is_null()) r.verdict.lambda0 = v.at("lambda0").get<double>();
    if (!v.at("alpha0").is_null()) r.verdict.alpha0 = v.at("alpha0").get<double>();
    r.verdict.explanation = v.at("explanation").get<std::string>();
    r.resonances = resonances_from(j.at("resonances"));
    r.endpoint_resonances = resonances_from(j.at("endpoint_resonances"));
    for (const auto& p : j.at("predicted_periods"))
      r.predicted_periods.push_back({p.at("includes_zero").get<bool>(), p.at("divisors").get<std::set<int>>()});
    for (const auto& p : j.at("eqcont3")) {
      Eqcont3Point e;
      e.lambda0 = p.at("lambda0").get<double>();
      e.k0 = p.at("k0").get<int>();
      e.alpha0 = p.at("alpha0").get<double>();
      e.bif_zk0 = p.at("bif_zk0").get<std::int64_t>();
      e.merged = p.at("merged").get<bool>();
      for (const auto& c : p.at("contributions"))
        e.contributions.push_back({c.at("k").get<int>(), c.at("alpha").get<double>(), c.at("multiplicity").get<int>()});
      r.eqcont3.push_back(e);
    }
    for (const auto& c : j.at("consistency"))
      r.consistency.push_back({c.at("label").get<std::string>(),
                               c.at("lambda0").get<double>(),
                               {c.at("consistent").get<bool>(), c.at("hypothesis_holds").get<bool>(),
                                c.at("explanation").get<std::string>()}});
    r.hypothesis_a_kset_empty = j.at("hypotheses").at("a_kset_empty").get<bool>();
    r.hypothesis_b_bounded_zeros = j.at("hypotheses").at("b_bounded_zeros").get<std::string>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("report JSON: ") + e.what(), 0);
  }
}

std::string format_report_text(const BifurcationReport& r) {
  std::ostringstream os;
  auto spectrum = [](const SpectralData& s) {
    std::string out;
    for (const auto& e : s.eigenvalues)
      out += (out.empty() ? "" : ", ") + fmt17(e.value) + (e.multiplicity > 1 ? "^" + std::to_string(e.multiplicity) : "");
    return "{" + out + "}";
  };
  auto set_text = [](const std::set<int>& s) {
    std::string out;
    for (int k : s) out += (out.empty() ? "" : ", ") + std::to_string(k);
    return "{" + out + "}";
  };
  os << "problem        " << r.problem << " (n = " << r.dimension << (r.scaled ? ", scaled" : "") << ")\n";
  os << "interval       [" << fmt17(r.lambda_minus) << ", " << fmt17(r.lambda_plus) << "]\n";
  os << "sigma(A(l-))   " << spectrum(r.spectrum_minus) << "\n";
  os << "sigma(A(l+))   " << spectrum(r.spectrum_plus) << "\n";
  os << "K              " << set_text(r.kset) << "\n";
  os << "ind(l-, l+)    " << (r.ind_minus ? std::to_string(*r.ind_minus) : "n/a") << ", "
     << (r.ind_plus ? std::to_string(*r.ind_plus) : "n/a") << "\n";
  os << "Bif            " << (r.bif ? r.bif->to_string() : "n/a");
  if (!r.bif_undefined.empty()) os << "  (undefined at Z_k, k in " << set_text(r.bif_undefined) << ")";
  os << "\nBif_LS         " << (r.bif_ls ? std::to_string(*r.bif_ls) : "n/a") << "\n";
  os << "criterion      " << criterion_name(r.verdict.criterion);
  if (r.verdict.witness_k) os << ", k = " << r.verdict.witness_k;
  if (r.verdict.lambda0) os << ", lambda0 = " << fmt17(*r.verdict.lambda0);
  if (r.verdict.alpha0) os << ", alpha0 = " << fmt17(*r.verdict.alpha0);
  os << "\n               " << r.verdict.explanation << "\n";
  for (std::size_t i = 0; i < r.resonances.size(); ++i) {
    const auto& res = r.resonances[i];
    os << "resonance      lambda0 = " << fmt17(res.lambda0) << ", k in " << set_text(res.frequencies)
       << ", kernel " << res.kernel_rep.to_string() << (res.tangential ? " (tangential)" : "");
    if (i < r.predicted_periods.size()) os << ", periods " << r.predicted_periods[i].to_string();
    os << "\n";
  }
  for (const auto& res : r.endpoint_resonances)
    os << "endpoint res.  lambda0 = " << fmt17(res.lambda0) << ", k in " << set_text(res.frequencies) << "\n";
  for (const auto& p : r.eqcont3)
    os << "scaled point   lambda0 = " << fmt17(p.lambda0) << ", k0 = " << p.k0 << ", alpha0 = " << fmt17(p.alpha0)
       << ", Bif_Z" << p.k0 << " = " << p.bif_zk0 << (p.merged ? " (merged)" : "") << "\n";
  for (const auto& c : r.consistency)
    os << "critical       " << c.label << ": " << (c.verdict.consistent ? "consistent" : "inconsistent") << " ("
       << c.verdict.explanation << ")\n";
  os << "hypotheses     (a) K empty: " << (r.hypothesis_a_kset_empty ? "yes" : "no")
     << "; (b) bounded zeros: " << r.hypothesis_b_bounded_zeros << "\n";
  for (const auto& w : r.warnings) os << "warning        " << w << "\n";
  return os.str();
}

void write_branch_csv(std::ostream& os, const Branch& b) {
  const std::size_t n = b.points.empty() ? 0 : b.points.front().loop.n;
  os << "# format_version=1\n";
  os << "# branch k0=" << b.k0 << " direction=" << b.direction << " lambda0=" << fmt17(b.lambda0) << "\n";
  os << "# coefficients c_i: u(t) = a0 + sum_k acos_k cos(kt) + asin_k sin(kt), flattened as"
        " [a0 (n) | acos_1 (n) | asin_1 (n) | ...], n="
     << n << "; rows may differ in length when the truncation grows\n";
  os << "lambda,amplitude,residual_norm,min_period_divisor,coefficients...\n";
  for (const auto& p : b.points) {
    os << fmt17(p.lambda) << "," << fmt17(p.amplitude) << "," << fmt17(p.residual_norm) << ","
       << p.min_period_divisor;
    for (double c : p.loop.coeffs) os << "," << fmt17(c);
    os << "\n";
  }
}

std::string branch_summary_json(const std::vector<Branch>& branches, int indent) {
  json out;
  out["format_version"] = 1;
  json arr = json::array();
  for (const auto& b : branches) {
    json pts = json::array();
    for (const auto& p : b.points)
      pts.push_back({{"amplitude", p.amplitude},
                     {"lambda", p.lambda},
                     {"drift", p.lambda - b.lambda0},
                     {"sup_amplitude", p.sup_amplitude},
                     {"residual_norm", p.residual_norm},
                     {"modes", p.loop.modes},
                     {"active_modes_count", p.active.size()},
                     {"min_period_divisor", p.min_period_divisor},
                     {"min_period", p.min_period_divisor == 0 ? "0" : "2pi/" + std::to_string(p.min_period_divisor)},
                     {"energy_variation", std::isnan(p.energy_variation) ? json(nullptr) : json(p.energy_variation)},
                     {"newton_iterations", p.newton_iterations}});
    std::set<int> divisors;
    for (const auto& p : b.points) divisors.insert(p.min_period_divisor);
    arr.push_back({{"k0", b.k0},
                   {"direction", b.direction},
                   {"lambda0", b.lambda0},
                   {"failed", b.failed},
                   {"failure", b.failure},
                   {"drift_sup_tail", b.drift_sup_tail},
                   {"measured_period_divisors", divisors},
                   {"warnings", b.warnings},
                   {"points", pts}});
  }
  out["branches"] = arr;
  return out.dump(indent);
}

}  // namespace equideg
