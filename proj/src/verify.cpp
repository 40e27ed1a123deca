#include "equideg/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "equideg/bifurcation.hpp"
#include "equideg/catalog.hpp"
#include "equideg/eqdeg.hpp"
#include "equideg/error.hpp"
#include "equideg/galerkin.hpp"
#include "json.hpp"

namespace equideg {

namespace {

struct Checker {
  std::ostringstream failures;
  std::set<std::string> reported;
  bool ok = true;
  void expect(bool cond, const std::string& what) {
    if (cond || !reported.insert(what).second) {
      ok = ok && cond;
      return;
    }
    if (!ok) failures << "; ";
    failures << what;
    ok = false;
  }
  VerifyRow row(int id, std::string title, const std::string& pass_detail) {
    return {id, std::move(title), ok, ok ? pass_detail : failures.str()};
  }
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Eigenvalues below x of a symmetric matrix, by the sign pattern of the
// leading principal minors of A - x I (Gaussian elimination without pivoting
// in long double). A pivot that is tiny against the matrix scale would make
// the elimination unstable; x is then nudged by a negligible amount.
int count_below(const SymmetricMatrix& a, double x) {
  const std::size_t n = a.size();
  double scale = 1;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(i, j)));
  for (int attempt = 0;; ++attempt) {
    std::vector<long double> m(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m[i * n + j] = a(i, j) - (i == j ? x : 0.0);
    int neg = 0;
    bool tiny = false;
    for (std::size_t k = 0; k < n && !tiny; ++k) {
      const long double piv = m[k * n + k];
      if (std::abs(piv) < 1e-12L * (scale + std::abs(x))) {
        tiny = true;
        break;
      }
      if (piv < 0) ++neg;
      for (std::size_t i = k + 1; i < n; ++i) {
        const long double f = m[i * n + k] / piv;
        for (std::size_t j = k + 1; j < n; ++j) m[i * n + j] -= f * m[k * n + j];
      }
    }
    if (!tiny || attempt == 8) return neg;
    x += 1e-11 * (scale + std::abs(x)) * (attempt + 1);
  }
}

std::vector<double> bisection_eigenvalues(const SymmetricMatrix& a) {
  const std::size_t n = a.size();
  double lo = -1, hi = 1;
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) r += std::abs(a(i, j));
    lo = std::min(lo, a(i, i) - r - 1);
    hi = std::max(hi, a(i, i) + r + 1);
  }
  std::vector<double> out;
  for (std::size_t idx = 0; idx < n; ++idx) {
    double l = lo, h = hi;
    for (int it = 0; it < 200 && h - l > 1e-15 * (1 + std::abs(l) + std::abs(h)); ++it) {
      const double mid = 0.5 * (l + h);
      (count_below(a, mid) >= int(idx) + 1 ? h : l) = mid;
    }
    out.push_back(0.5 * (l + h));
  }
  return out;
}

// Number of eigenvalues strictly above k^2, counted directly.
int count_above(const SymmetricMatrix& a, double x) { return int(a.size()) - count_below(a, x + 1e-12 * (1 + std::abs(x))); }

TomDieckElement random_element(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::int64_t> coef(-100000, 100000);
  std::uniform_int_distribution<int> count(0, 6), freq(1, 48), pick(0, 4);
  TomDieckElement::Coeffs zk;
  const int terms = count(rng);
  for (int t = 0; t < terms; ++t) zk[freq(rng)] = pick(rng) == 0 ? 0 : coef(rng);
  return {pick(rng) == 0 ? 0 : coef(rng), zk};
}

LinearBlockData random_block_data(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> parts(0, 4), freq(0, 12), mult(1, 4);
  std::vector<RepPart> raw;
  const int np = parts(rng);
  for (int i = 0; i < np; ++i) raw.push_back({mult(rng), freq(rng)});
  RepDecomposition rep(raw);
  std::vector<int> morse;
  for (const auto& p : rep.parts()) {
    const int m = std::uniform_int_distribution<int>(0, p.multiplicity)(rng);
    morse.push_back(p.frequency == 0 ? m : 2 * m);
  }
  return {rep, morse};
}

ProblemSpec random_linear_problem(std::mt19937_64& rng, int variant) {
  ProblemSpec p;
  p.name = "random";
  p.n = 2 + std::size_t(variant % 3);
  p.family = MatrixFamily(p.n);
  std::uniform_real_distribution<double> diag(-3.0, 30.0), off(-3.0, 3.0), slope(-4.0, 4.0);
  for (std::size_t i = 0; i < p.n; ++i)
    for (std::size_t j = i; j < p.n; ++j) {
      if (i != j && variant % 2 == 0) continue;
      p.family.set_entry(i, j, {{0, i == j ? diag(rng) : off(rng)}, {1, slope(rng)}, {2, i == j ? slope(rng) : 0.0}});
    }
  return p;
}

bool nonresonant_at(const ProblemSpec& p, double l) { return resonant_frequencies(eigen_sym(p.linear_part(l))).empty(); }

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double l2(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

std::vector<VerifyRow> run_verification(const VerifyOptions& opts) {
  static const std::set<std::string> faults = {"", "jk", "ring", "eigen", "period"};
  if (!faults.count(opts.fault)) throw PreconditionError("unknown fault '" + opts.fault + "'");
  const bool fault_jk = opts.fault == "jk", fault_ring = opts.fault == "ring";
  const bool fault_eigen = opts.fault == "eigen", fault_period = opts.fault == "period";
  auto jk = [&](const SymmetricMatrix& a, int k) { return j_k(a, k) + (fault_jk ? 1 : 0); };
  auto mul = [&](const TomDieckElement& a, const TomDieckElement& b) {
    const TomDieckElement p = star(a, b);
    return fault_ring ? add(p, TomDieckElement::unit()) : p;
  };
  auto divisor = [&](const FourierLoop& u) { return minimal_period_divisor(u) * (fault_period ? 2 : 1); };
  auto guarded = [](int id, const std::string& title, const std::function<VerifyRow()>& body) {
    try {
      return body();
    } catch (const std::exception& e) {
      return VerifyRow{id, title, false, std::string("exception: ") + e.what()};
    }
  };
  std::vector<VerifyRow> rows;

  rows.push_back(guarded(1, "Example 1 invariants", [&] {
    Checker c;
    const auto e = catalog::example1();
    const SymmetricMatrix ap = e.problem.linear_part(1.0), am = e.problem.linear_part(-1.0);
    c.expect(jk(ap, 1) == 2, "j_1(A(+1)) != 2");
    c.expect(jk(am, 1) == 1, "j_1(A(-1)) != 1");
    c.expect(e.problem.index_at_infinity(1.0) == -1 && e.problem.index_at_infinity(-1.0) == -1, "ind(+-1) != -1");
    const BifurcationReport r = analyze(e.problem, e.lambda_minus, e.lambda_plus);
    c.expect(r.kset.empty(), "K not empty");
    c.expect(r.resonances.size() == 1 && std::abs(r.resonances[0].lambda0 - (1 - std::sqrt(2.0))) < 1e-9,
             "interior resonance is not 1-sqrt2");
    c.expect(r.predicted_periods.size() == 1 && r.predicted_periods[0] == PeriodSet{false, {1}}, "periods != {2pi}");
    c.expect(r.verdict.criterion == Criterion::eqcont1_ii && r.verdict.witness_k == 1, "criterion is not eqcont1(ii), k=1");
    return c.row(1, "Example 1 invariants", "j_1 = 2 / 1, ind = -1, K empty, lambda0 = 1-sqrt2, periods {2pi}, eqcont1(ii) k=1");
  }));

  rows.push_back(guarded(2, "Example 2 invariants", [&] {
    Checker c;
    const auto e = catalog::example2();
    c.expect(resonant_frequencies(eigen_sym(e.problem.linear_part(0.0))) == std::set<int>{2},
             "sigma(A(0)) meets {k^2} outside {4}");
    c.expect(jk(e.problem.linear_part(0.5), 2) == 1, "j_2(A(1/2)) != 1");
    c.expect(jk(e.problem.linear_part(-0.5), 2) == 0, "j_2(A(-1/2)) != 0");
    const BifurcationReport r = analyze(e.problem, e.lambda_minus, e.lambda_plus);
    c.expect(r.verdict.criterion == Criterion::eqcont2_ii && r.verdict.witness_k == 2, "criterion is not eqcont2(ii), k=2");
    c.expect(r.verdict.lambda0 && std::abs(*r.verdict.lambda0) < 1e-9, "lambda0 != 0");
    c.expect(r.predicted_periods.size() == 1 && r.predicted_periods[0] == PeriodSet{false, {2}}, "periods != {pi}");
    return c.row(2, "Example 2 invariants", "sigma(A(0)) meets {4}, j_2 = 1 / 0, eqcont2(ii) k=2 at 0, periods {pi}");
  }));

  rows.push_back(guarded(3, "Example 3 invariants", [&] {
    Checker c;
    const auto e = catalog::example3();
    c.expect(resonant_frequencies(eigen_sym(e.problem.linear_part(0.0))) == std::set<int>{2, 3, 5},
             "sigma(A(0)) meets {k^2} outside {4,9,25}");
    c.expect(jk(e.problem.linear_part(1.0), 2) == 4, "j_2(A(1)) != 4");
    c.expect(jk(e.problem.linear_part(-1.0), 2) == 3, "j_2(A(-1)) != 3");
    const ResonancePoint r0 = resonance_at(e.problem.effective_family(), 0.0);
    c.expect(predict_periods(r0) == PeriodSet{false, {1, 2, 3, 5}}, "periods != {2pi, pi, 2pi/3, 2pi/5}");
    return c.row(3, "Example 3 invariants", "sigma(A(0)) meets {4,9,25}, j_2 = 4 / 3, periods {2pi, pi, 2pi/3, 2pi/5}");
  }));

  rows.push_back(guarded(4, "Leray-Schauder blindness", [&] {
    Checker c;
    for (const auto& e : catalog::all()) {
      const BifIndex b = bif_index_full(e.problem, e.lambda_minus, e.lambda_plus);
      c.expect(!b.value.is_zero(), e.problem.name + ": Bif = Theta");
      c.expect(bif_index_ls(e.problem, e.lambda_minus, e.lambda_plus) == 0, e.problem.name + ": Bif_LS != 0");
    }
    return c.row(4, "Leray-Schauder blindness", "Bif != Theta and Bif_LS = 0 on all three examples");
  }));

  rows.push_back(guarded(5, "ring laws", [&] {
    Checker c;
    std::mt19937_64 rng(opts.seed);
    const TomDieckElement zero, one = TomDieckElement::unit();
    for (int t = 0; t < 1000 && c.ok; ++t) {
      const TomDieckElement a = random_element(rng), b = random_element(rng), d = random_element(rng);
      c.expect(add(a, b) == add(b, a) && mul(a, b) == mul(b, a), "commutativity");
      c.expect(add(add(a, b), d) == add(a, add(b, d)) && mul(mul(a, b), d) == mul(a, mul(b, d)), "associativity");
      c.expect(mul(a, add(b, d)) == add(mul(a, b), mul(a, d)), "distributivity");
      c.expect(add(a, zero) == a && mul(a, one) == a && mul(a, zero) == zero, "unit/zero laws");
      c.expect(add(a, scalar_mul(-1, a)).is_zero(), "additive inverse");
      for (const TomDieckElement& x : {add(a, b), mul(a, b), a - a})
        for (const auto& [k, v] : x.coeffs()) c.expect(k >= 1 && v != 0, "non-canonical representation");
    }
    return c.row(5, "ring laws", "1000 random triples");
  }));

  rows.push_back(guarded(6, "linear degree laws", [&] {
    Checker c;
    std::mt19937_64 rng(opts.seed + 1);
    for (int t = 0; t < 200; ++t) {
      const LinearBlockData a = random_block_data(rng), b = random_block_data(rng);
      c.expect(lin_deg(direct_sum(a, b)) == mul(lin_deg(a), lin_deg(b)), "product formula");
      LinearBlockData pos = b;
      std::fill(pos.block_morse.begin(), pos.block_morse.end(), 0);
      c.expect(lin_deg(direct_sum(a, pos)) == lin_deg(a), "suspension");
    }
    for (int t = 0; t < 100; ++t) {
      LinearBlockData d = random_block_data(rng);
      for (std::size_t i = 0; i < d.block_morse.size(); ++i) {
        const auto& p = d.rep.parts()[i];
        d.block_morse[i] = p.frequency == 0 ? p.multiplicity : 2 * p.multiplicity;
      }
      const std::int64_t sign = d.rep.multiplicity(0) % 2 == 0 ? 1 : -1;
      TomDieckElement::Coeffs want;
      for (const auto& p : d.rep.parts())
        if (p.frequency > 0) want[p.frequency] = sign * p.multiplicity;
      c.expect(lin_deg(d) == TomDieckElement(sign, want), "lin_deg(-Id) closed form");
    }
    return c.row(6, "linear degree laws", "product formula and suspension on 200 pairs, -Id closed form on 100");
  }));

  rows.push_back(guarded(7, "interval additivity and antisymmetry", [&] {
    Checker c;
    std::mt19937_64 rng(opts.seed + 2);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    int done = 0;
    while (done < 50) {
      const ProblemSpec p = random_linear_problem(rng, done);
      double l[3] = {u(rng), u(rng), u(rng)};
      std::sort(l, l + 3);
      if (!(nonresonant_at(p, l[0]) && nonresonant_at(p, l[1]) && nonresonant_at(p, l[2]))) continue;
      const TomDieckElement whole = bif_index(p, l[0], l[2]);
      c.expect(add(bif_index(p, l[0], l[1]), bif_index(p, l[1], l[2])) == whole, "additivity");
      c.expect(bif_index(p, l[2], l[0]) == scalar_mul(-1, whole), "antisymmetry");
      ++done;
    }
    return c.row(7, "interval additivity and antisymmetry", "50 random polynomial families");
  }));

  rows.push_back(guarded(8, "eigensolver vs bisection", [&] {
    Checker c;
    std::mt19937_64 rng(opts.seed + 3);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    double worst = 0;
    for (int t = 0; t < 100; ++t) {
      const std::size_t n = 1 + std::size_t(t % 8);
      SymmetricMatrix a(n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) a.set(i, j, u(rng));
      const std::vector<double> want = bisection_eigenvalues(a);
      std::vector<double> got;
      for (const auto& ev : eigen_sym(a, 1e-14).eigenvalues)
        for (int m = 0; m < ev.multiplicity; ++m) got.push_back(ev.value + (fault_eigen ? 1e-6 : 0.0));
      c.expect(got.size() == n, "dimension mismatch");
      for (std::size_t i = 0; i < std::min(n, got.size()); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
      // j_k agrees with direct counting.
      for (int k = 0; k <= 3; ++k)
        if (resonant_frequencies(eigen_sym(a)).count(k) == 0)
          c.expect(j_k(a, k) + (fault_jk ? 1 : 0) == count_above(a, double(k) * k), "j_k vs counting");
    }
    c.expect(worst < 1e-8, "max error " + num(worst));
    return c.row(8, "eigensolver vs bisection", "100 matrices, max |error| = " + num(worst));
  }));

  rows.push_back(guarded(9, "continuation evidence", [&] {
    Checker c;
    const std::vector<double> amps = {10, 20, 40, 80, 160};
    std::string summary;
    for (int ex : {2, 1}) {
      const auto e = ex == 1 ? catalog::example1() : catalog::example2();
      const ScanResult s = scan_resonances(e.problem.effective_family(), e.lambda_minus, e.lambda_plus);
      c.expect(s.interior.size() == 1, e.problem.name + ": expected one interior resonance");
      if (s.interior.size() != 1) continue;
      const auto branches = continue_to_infinity(e.problem, s.interior[0], amps, {});
      c.expect(branches.size() == 1 && !branches[0].failed && branches[0].points.size() == amps.size(),
               e.problem.name + ": branch incomplete");
      if (branches.empty()) continue;
      const Branch& b = branches[0];
      const int want = ex == 1 ? 1 : 2;
      double worst_res = 0, worst_energy = 0;
      for (const auto& pt : b.points) {
        worst_res = std::max(worst_res, pt.residual_norm);
        worst_energy = std::max(worst_energy, pt.energy_variation);
        c.expect(divisor(pt.loop) == want, e.problem.name + ": period 2pi/" + std::to_string(divisor(pt.loop)) +
                                                " at R=" + num(pt.amplitude));
      }
      c.expect(worst_res < 1e-9, e.problem.name + ": residual " + num(worst_res));
      if (ex == 2 && b.points.size() == amps.size()) {
        const double l160 = b.points.back().lambda;
        c.expect(std::abs(l160) < 0.05, "|lambda(160)| = " + num(std::abs(l160)));
        for (std::size_t i = 3; i < b.points.size(); ++i)
          c.expect(std::abs(b.points[i].lambda) <= std::abs(b.points[i - 1].lambda), "|lambda| not monotone");
        c.expect(worst_energy < 1e-8, "energy variation " + num(worst_energy));
        summary += "example2: |lambda(160)| = " + num(std::abs(l160)) + ", max residual " + num(worst_res) +
                   ", max energy spread " + num(worst_energy) + ", period pi; ";
      } else {
        summary += "example1: max residual " + num(worst_res) + ", period 2pi";
      }
    }
    return c.row(9, "continuation evidence", summary);
  }));

  rows.push_back(guarded(10, "Jacobian and equivariance", [&] {
    Checker c;
    std::mt19937_64 rng(opts.seed + 4);
    std::normal_distribution<double> g(0.0, 1.0);
    const auto all = catalog::all();
    double worst_jac = 0, worst_eq = 0;
    for (int t = 0; t < 20; ++t) {
      const ProblemSpec& p = all[std::size_t(t) % all.size()].problem;
      FourierLoop u(p.n, 5);
      for (double& x : u.coeffs) x = 1.5 * g(rng);
      const double l = 0.3 * g(rng);
      const std::size_t d = u.size();
      std::vector<double> v(d);
      for (double& x : v) x = g(rng);
      const auto jv = jacobian_apply(u, l, p, v);
      const double h = 1e-6;
      FourierLoop up = u;
      for (std::size_t i = 0; i < d; ++i) up.coeffs[i] += h * v[i];
      const auto r0 = residual(u, l, p), r1 = residual(up, l, p);
      std::vector<double> fd(d);
      for (std::size_t i = 0; i < d; ++i) fd[i] = (r1[i] - r0[i]) / h;
      worst_jac = std::max(worst_jac, max_abs_diff(fd, jv) / (1 + l2(jv)));
      const double s = 0.123 + t;
      const auto lhs = residual(u.shifted(s), l, p, 4096);
      FourierLoop rhs(p.n, 5);
      rhs.coeffs = residual(u, l, p, 4096);
      worst_eq = std::max(worst_eq, max_abs_diff(lhs, rhs.shifted(s).coeffs) / (1 + l2(lhs)));
    }
    c.expect(worst_jac < 1e-5, "Jacobian mismatch " + num(worst_jac));
    c.expect(worst_eq < 1e-12, "equivariance defect " + num(worst_eq));
    return c.row(10, "Jacobian and equivariance",
                 "20 loops: Jacobian rel. error " + num(worst_jac) + ", shift defect " + num(worst_eq));
  }));

  return rows;
}

std::string verify_rows_json(const std::vector<VerifyRow>& rows, int indent) {
  nlohmann::json out;
  out["format_version"] = 1;
  bool all = true;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"detail", r.detail}});
    all = all && r.pass;
  }
  out["rows"] = arr;
  out["all_pass"] = all;
  return out.dump(indent);
}

std::string verify_rows_table(const std::vector<VerifyRow>& rows) {
  std::ostringstream os;
  for (const auto& r : rows) {
    char head[80];
    std::snprintf(head, sizeof head, "%2d  %-4s  %-38s  ", r.id, r.pass ? "PASS" : "FAIL", r.title.c_str());
    os << head << r.detail << "\n";
  }
  return os.str();
}

}  // namespace equideg
