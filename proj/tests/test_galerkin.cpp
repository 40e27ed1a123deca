#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "equideg/catalog.hpp"
#include "equideg/error.hpp"
#include "equideg/galerkin.hpp"

using namespace equideg;

namespace {

constexpr double kPi = std::numbers::pi;

ProblemSpec linear_problem(std::vector<Polynomial> diag) {
  ProblemSpec p;
  p.name = "linear";
  p.n = diag.size();
  p.family = MatrixFamily(p.n);
  for (std::size_t i = 0; i < p.n; ++i) p.family.set_entry(i, i, diag[i]);
  return p;
}

// Same potential as the built-in Kepler term, supplied as a user gradient.
ProblemSpec as_user(ProblemSpec p) {
  const double a = std::get<KeplerPerturbation>(p.perturbation).a;
  const bool squared = std::get<KeplerPerturbation>(p.perturbation).scale == KeplerScale::lambda_squared;
  UserPerturbation u;
  u.gradient = [a, squared](std::span<const double> x, double l, std::span<double> g) {
    double r2 = 0;
    for (double v : x) r2 += v * v;
    const double s = (squared ? l * l : 1.0) / std::pow(r2 + a, 1.5);
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = s * x[i];
  };
  u.potential = [a, squared](std::span<const double> x, double l) {
    double r2 = 0;
    for (double v : x) r2 += v * v;
    return -(squared ? l * l : 1.0) / std::sqrt(r2 + a);
  };
  p.perturbation = u;
  p.index_rule = IndexRule::unavailable();
  return p;
}

FourierLoop random_loop(std::mt19937_64& rng, std::size_t n, int modes, double scale) {
  std::normal_distribution<double> g(0.0, 1.0);
  FourierLoop u(n, modes);
  for (double& c : u.coeffs) c = scale * g(rng);
  return u;
}

double norm(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double max_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Independent oracle: evaluate u'' + grad V pointwise on a fine grid by direct
// trigonometric sums, then project by the trapezoidal rule.
std::vector<double> time_domain_residual(const FourierLoop& u, double lambda, const ProblemSpec& p, int grid) {
  const std::size_t n = u.n;
  const SymmetricMatrix a = p.linear_part(lambda);
  const double s = p.kepler_scale(lambda);
  const double ak = std::get<KeplerPerturbation>(p.perturbation).a;
  std::vector<long double> acc(u.size(), 0.0L);
  std::vector<double> x(n), xdd(n);
  for (int j = 0; j < grid; ++j) {
    const double t = 2 * kPi * j / grid;
    std::fill(x.begin(), x.end(), 0.0);
    std::fill(xdd.begin(), xdd.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) x[i] = u.a0()[i];
    for (int k = 1; k <= u.modes; ++k)
      for (std::size_t i = 0; i < n; ++i) {
        const double term = u.acos(k)[i] * std::cos(k * t) + u.asin(k)[i] * std::sin(k * t);
        x[i] += term;
        xdd[i] -= double(k) * k * term;
      }
    double r2 = 0;
    for (double v : x) r2 += v * v;
    const double f = s / std::pow(r2 + ak, 1.5);
    for (std::size_t i = 0; i < n; ++i) {
      double g = xdd[i] + f * x[i];
      for (std::size_t l = 0; l < n; ++l) g += a(i, l) * x[l];
      acc[i] += g;
      for (int k = 1; k <= u.modes; ++k) {
        acc[n * (2 * std::size_t(k) - 1) + i] += 2.0L * g * std::cos(k * t);
        acc[n * 2 * std::size_t(k) + i] += 2.0L * g * std::sin(k * t);
      }
    }
  }
  std::vector<double> r(u.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = double(acc[i] / grid);
  return r;
}

}  // namespace

TEST_CASE("zero loop has zero residual") {
  for (const auto& e : catalog::all())
    for (double l : {-0.3, 0.0, 0.7}) {
      const FourierLoop u(e.problem.n, 8);
      CHECK(norm(residual(u, l, e.problem)) == 0.0);
    }
}

TEST_CASE("linear resonance identity") {
  const ProblemSpec p = linear_problem({{{0, 4.0}}});
  for (double amp : {1e-3, 1.0, 37.5, 1e6}) {
    const std::vector<double> d{1.0};
    const FourierLoop u = FourierLoop::cosine(1, 8, 2, d, amp);
    CHECK(norm(residual(u, 0.0, p)) <= 1e-13 * amp);
  }
}

TEST_CASE("coefficient residual matches a time-domain oracle") {
  const auto e = catalog::example2();
  const std::vector<double> e1{1, 0, 0, 0};
  FourierLoop u = FourierLoop::cosine(4, 16, 2, e1, 50.0);
  u.acos(6)[0] = 0.3;
  u.asin(1)[2] = -0.2;
  const double lambda = 1e-3;
  const std::vector<double> lib = residual(u, lambda, e.problem, 4096);
  const std::vector<double> ref = time_domain_residual(u, lambda, e.problem, 16384);
  CHECK(max_diff(lib, ref) < 1e-10);
}

TEST_CASE("loop evaluation, shift and derivative") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const FourierLoop u = random_loop(rng, 3, 6, 1.0);
    const double t = 6.0 * trial / 20.0, s = 0.37 * trial;
    CHECK(max_diff(u.eval(t), u.eval(t + 2 * kPi)) < 1e-12);
    CHECK(max_diff(u.shifted(s).eval(t), u.eval(t + s)) < 1e-12);
    CHECK(max_diff(u.shifted(s).shifted(-s).coeffs, u.coeffs) < 1e-12);
    const double h = 1e-5;
    const auto fd = [&] {
      auto p = u.eval(t + h), m = u.eval(t - h);
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = (p[i] - m[i]) / (2 * h);
      return p;
    }();
    CHECK(max_diff(u.derivative().eval(t), fd) < 1e-7);
    CHECK(u.amplitude(4096) >= 0.0);
    CHECK(u.resized(12).resized(6) == u);
  }
}

TEST_CASE("residual is equivariant under time shifts") {
  std::mt19937_64 rng(11);
  for (const auto& e : catalog::all())
    for (int trial = 0; trial < 5; ++trial) {
      const FourierLoop u = random_loop(rng, e.problem.n, 6, 2.0);
      const double l = 0.1 * trial - 0.2;
      // Node-aligned shifts commute with the discrete transform exactly.
      const std::size_t m = smooth_size(4 * 6 + 1);
      const double s = 2 * kPi * double(3 + trial) / double(m);
      const auto lhs = residual(u.shifted(s), l, e.problem);
      FourierLoop r0(e.problem.n, 6);
      r0.coeffs = residual(u, l, e.problem);
      CHECK(max_diff(lhs, r0.shifted(s).coeffs) < 1e-12 * (1 + norm(lhs)));
      // Arbitrary shifts, on a grid fine enough that aliasing is below rounding.
      const double s2 = 0.123 + trial;
      const auto lhs2 = residual(u.shifted(s2), l, e.problem, 4096);
      FourierLoop r2(e.problem.n, 6);
      r2.coeffs = residual(u, l, e.problem, 4096);
      CHECK(max_diff(lhs2, r2.shifted(s2).coeffs) < 1e-12 * (1 + norm(lhs2)));
    }
}

TEST_CASE("analytic Jacobian matches finite differences") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  int checked = 0;
  for (const auto& e : catalog::all())
    for (int trial = 0; trial < 7 && checked < 20; ++trial, ++checked) {
      const FourierLoop u = random_loop(rng, e.problem.n, 5, 1.5);
      const double l = 0.3 * g(rng);
      const std::size_t d = u.size();
      const auto ja = assemble_jacobian(u, l, e.problem, JacobianMethod::analytic);
      const auto jf = assemble_jacobian(u, l, e.problem, JacobianMethod::finite_difference);
      std::vector<double> v(d);
      for (double& x : v) x = g(rng);
      // Directional derivative of the residual vs assembled Jacobian.
      const double h = 1e-6;
      FourierLoop up = u;
      for (std::size_t i = 0; i < d; ++i) up.coeffs[i] += h * v[i];
      const auto r0 = residual(u, l, e.problem), r1 = residual(up, l, e.problem);
      std::vector<double> dir(d), jv(d, 0.0);
      for (std::size_t i = 0; i < d; ++i) dir[i] = (r1[i] - r0[i]) / h;
      for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) jv[r] += ja[r * d + c] * v[c];
      CHECK(max_diff(dir, jv) < 1e-5 * (1 + norm(jv)));
      CHECK(max_diff(ja, jf) < 1e-5 * (1 + norm(ja) / double(d)));
      const auto op = jacobian_apply(u, l, e.problem, v);
      CHECK(max_diff(op, jv) < 1e-11 * (1 + norm(jv)));
    }
  CHECK(checked == 20);
}

TEST_CASE("user gradients reproduce the built-in Kepler term") {
  std::mt19937_64 rng(5);
  for (const auto& e : catalog::all()) {
    const ProblemSpec user = as_user(e.problem);
    const FourierLoop u = random_loop(rng, e.problem.n, 4, 3.0);
    const double l = 0.4;
    const auto rb = residual(u, l, e.problem), ru = residual(u, l, user);
    CHECK(max_diff(rb, ru) < 1e-12 * (1 + norm(rb)));
    const auto jb = assemble_jacobian(u, l, e.problem, JacobianMethod::analytic);
    const auto ju = assemble_jacobian(u, l, user, JacobianMethod::analytic);
    CHECK(max_diff(jb, ju) < 1e-6);
    CHECK(energy_variation(u, l, e.problem) == doctest::Approx(energy_variation(u, l, user)).epsilon(1e-10));
  }
}

TEST_CASE("newton_solve: trivial cases") {
  const ProblemSpec p = linear_problem({{{0, 4.0}}});
  const std::vector<double> d{1.0};
  SUBCASE("perturbed mode-2 guess is a fixed point") {
    const FourierLoop g = FourierLoop::cosine(1, 8, 2, d, 1.0 + 1e-3);
    const FourierLoop u = newton_solve(g, 0.0, p);
    CHECK(norm(residual(u, 0.0, p)) < 1e-10);
    CHECK(active_modes(u) == std::set<int>{2});
  }
  SUBCASE("zero guess returns zero") {
    for (const auto& e : catalog::all()) {
      const FourierLoop u = newton_solve(FourierLoop(e.problem.n, 8), 0.2, e.problem);
      CHECK(norm(u.coeffs) == 0.0);
    }
  }
  SUBCASE("singular augmented Jacobian is a rank error") {
    FourierLoop g = FourierLoop::cosine(1, 8, 2, d, 1.0);
    g.acos(1)[0] = 0.1;
    GalerkinOptions o;
    o.adaptive = false;
    CHECK_THROWS_AS(newton_solve(g, 0.0, p, o), RankError);
    try {
      newton_solve(g, 0.0, p, o);
    } catch (const RankError& err) {
      CHECK(err.condition_estimate() > 1e12);
    }
  }
}

TEST_CASE("newton_solve: Example 2 loop of amplitude 40") {
  const auto e = catalog::example2();
  const std::vector<double> e1{1, 0, 0, 0};
  // lambda on the branch through R = 40 (positive lambda has no such loop:
  // Newton collapses onto the equilibrium, checked below).
  const double lambda = -8.103374e-5;
  for (JacobianMethod m : {JacobianMethod::analytic, JacobianMethod::finite_difference})
    for (bool adaptive : {false, true}) {
      if (m == JacobianMethod::finite_difference && adaptive) continue;
      GalerkinOptions o;
      o.modes = 16;
      o.adaptive = adaptive;
      o.jacobian = m;
      const SolveResult s = newton_solve_detailed(FourierLoop::cosine(4, 16, 2, e1, 40.0), lambda, e.problem, o);
      CHECK(s.converged);
      CHECK(s.residual_norm < 1e-9);
      double total = 0;
      for (int k = 0; k <= s.loop.modes; ++k) total += s.loop.mode_energy(k);
      CHECK(s.loop.mode_energy(2) > 0.99 * total);
      CHECK(s.loop.amplitude() > 35.0);
      CHECK(minimal_period(s.loop) == doctest::Approx(kPi));
    }
  const FourierLoop collapsed = newton_solve(FourierLoop::cosine(4, 16, 2, e1, 40.0), 0.05, e.problem);
  CHECK(collapsed.amplitude() < 1e-6);
}

TEST_CASE("pinned solve: truncation convergence") {
  for (int ex : {1, 2}) {
    const auto e = ex == 1 ? catalog::example1() : catalog::example2();
    const int k0 = ex == 1 ? 1 : 2;
    const double l0 = ex == 1 ? 1 - std::sqrt(2.0) : 0.0;
    std::vector<double> d(4, 0.0);
    d[ex == 1 ? 1 : 0] = 1;
    GalerkinOptions fixed;
    fixed.adaptive = false;
    const double r = 2.0;
    const SolveResult a = solve_pinned(FourierLoop::cosine(4, 32, k0, d, r), l0, k0, r, e.problem, fixed);
    const SolveResult b = solve_pinned(a.loop.resized(64), a.lambda, k0, r, e.problem, fixed);
    CHECK(a.converged);
    CHECK(b.converged);
    CHECK(max_diff(a.loop.resized(64).coeffs, b.loop.coeffs) < 1e-6);
    // Adaptive truncation at a larger amplitude, then one more doubling.
    const double r2 = 10.0;
    const SolveResult c = solve_pinned(FourierLoop::cosine(4, 32, k0, d, r2), l0, k0, r2, e.problem);
    fixed.modes = 2 * c.loop.modes;
    const SolveResult c2 = solve_pinned(c.loop.resized(2 * c.loop.modes), c.lambda, k0, r2, e.problem, fixed);
    CHECK(max_diff(c.loop.resized(c2.loop.modes).coeffs, c2.loop.coeffs) < 1e-6);
    CHECK(std::abs(c.lambda - c2.lambda) < 1e-9);
  }
}

TEST_CASE("solve_pinned preconditions") {
  const auto e = catalog::example2();
  const FourierLoop g(4, 8);
  CHECK_THROWS_AS(solve_pinned(g, 0.0, 9, 1.0, e.problem), PreconditionError);
  CHECK_THROWS_AS(solve_pinned(g, 0.0, 2, -1.0, e.problem), PreconditionError);
  CHECK_THROWS_AS(solve_pinned(FourierLoop(3, 8), 0.0, 2, 1.0, e.problem), PreconditionError);
}

TEST_CASE("minimal period") {
  FourierLoop c(2, 8);
  c.a0()[0] = 3;
  CHECK(minimal_period(c, 1e-10) == 0.0);
  FourierLoop u(2, 8);
  u.acos(2)[0] = 1;
  CHECK(minimal_period(u, 1e-10) == doctest::Approx(kPi));
  u.asin(3)[1] = 0.5;
  CHECK(minimal_period(u, 1e-10) == doctest::Approx(2 * kPi));
  FourierLoop w(1, 8);
  w.acos(2)[0] = 1;
  w.acos(4)[0] = 0.1;
  w.asin(6)[0] = 0.01;
  CHECK(minimal_period_divisor(w) == 2);
  w.acos(3)[0] = 1e-9;  // energy 1e-18 relative: below threshold
  CHECK(minimal_period_divisor(w, 1e-10) == 2);
  CHECK(minimal_period_divisor(w, 1e-20) == 1);
  CHECK_THROWS_AS(minimal_period(w, 0.0), PreconditionError);
  CHECK_THROWS_AS(minimal_period(w, 1.0), PreconditionError);
}

TEST_CASE("continuation: linear kernel direction is exactly solvable") {
  const ProblemSpec p = linear_problem({{{0, 4.0}, {1, 1.0}}});
  const ScanResult s = scan_resonances(p.effective_family(), -1.0, 1.0);
  REQUIRE(s.interior.size() == 1);
  CHECK(s.interior[0].frequencies == std::set<int>{2});
  const auto branches = continue_to_infinity(p, s.interior[0], {1, 10, 100, 1000}, {});
  REQUIRE(branches.size() == 1);
  CHECK(!branches[0].failed);
  REQUIRE(branches[0].points.size() == 4);
  for (const auto& pt : branches[0].points) {
    CHECK(std::abs(pt.lambda - s.interior[0].lambda0) < 1e-14);
    CHECK(pt.residual_norm < 1e-10);
    CHECK(pt.min_period_divisor == 2);
  }
}

TEST_CASE("continuation: one branch per kernel direction") {
  const ProblemSpec p = linear_problem({{{0, 4.0}, {1, 1.0}}, {{0, 4.0}, {1, 1.0}}});
  const ScanResult s = scan_resonances(p.effective_family(), -1.0, 1.0);
  REQUIRE(s.interior.size() == 1);
  const auto branches = continue_to_infinity(p, s.interior[0], {1, 2}, {});
  CHECK(branches.size() == 2);
}

TEST_CASE("continuation: Newton failure truncates the branch") {
  const auto e = catalog::example2();
  const ResonancePoint r = resonance_at(e.problem.effective_family(), 0.0);
  ContinuationOptions o;
  o.max_iter = 0;
  o.adaptive = false;
  const auto branches = continue_to_infinity(e.problem, r, {10, 20}, o);
  REQUIRE(branches.size() == 1);
  CHECK(branches[0].failed);
  CHECK(branches[0].points.empty());
  CHECK(!branches[0].failure.empty());
}

TEST_CASE("continuation toward infinity on the examples") {
  {
    const auto e = catalog::example2();
    const ScanResult s = scan_resonances(e.problem.effective_family(), e.lambda_minus, e.lambda_plus);
    REQUIRE(s.interior.size() == 1);
    const auto branches = continue_to_infinity(e.problem, s.interior[0], {10, 20, 40, 80, 160}, {});
    REQUIRE(branches.size() == 1);
    const Branch& b = branches[0];
    CHECK(!b.failed);
    REQUIRE(b.points.size() == 5);
    for (const auto& pt : b.points) {
      CHECK(pt.residual_norm < 1e-9);
      CHECK(pt.min_period_divisor == 2);
      CHECK(pt.energy_variation < 1e-8);
      CHECK(pt.sup_amplitude > 0.9 * pt.amplitude);
    }
    CHECK(std::abs(b.points[4].lambda) < std::abs(b.points[0].lambda));
    CHECK(std::abs(b.points[4].lambda) < 0.05);
    CHECK(b.warnings.empty());
  }
  {
    const auto e = catalog::example1();
    const ScanResult s = scan_resonances(e.problem.effective_family(), e.lambda_minus, e.lambda_plus);
    REQUIRE(s.interior.size() == 1);
    CHECK(s.interior[0].lambda0 == doctest::Approx(1 - std::sqrt(2.0)).epsilon(1e-12));
    const auto branches = continue_to_infinity(e.problem, s.interior[0], {10, 20, 40}, {});
    REQUIRE(branches.size() == 1);
    REQUIRE(branches[0].points.size() == 3);
    CHECK(branches[0].points[2].active == std::set<int>{1});
    REQUIRE(branches.size() == 1);
    CHECK(!branches[0].failed);
    for (const auto& pt : branches[0].points) {
      CHECK(pt.residual_norm < 1e-9);
      CHECK(pt.min_period_divisor == 1);
      // Odd harmonics only (they fade as R grows): period 2pi.
      CHECK(pt.active.count(1) == 1);
      for (int k : pt.active) CHECK(k % 2 == 1);
      CHECK(pt.energy_variation < 1e-8);
    }
  }
}
