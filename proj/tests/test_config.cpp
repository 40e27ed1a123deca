#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "equideg/catalog.hpp"
#include "equideg/config.hpp"
#include "equideg/error.hpp"
#include "generators.hpp"

using namespace equideg;

namespace {

const std::filesystem::path kProblems = EQUIDEG_PROBLEMS_DIR;

int parse_error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

const char* kMinimal = R"(format_version = 1
[problem]
n = 2
[matrix]
1 1 = (0, 4) (1, 1)
2 2 = (0, 2)
[interval]
lambda_minus = -0.5
lambda_plus = 0.5
)";

}  // namespace

TEST_CASE("bundled configs equal the catalog") {
  const auto entries = catalog::all();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const ProblemConfig c = load_config(kProblems / ("example" + std::to_string(i + 1) + ".cfg"));
    CAPTURE(e.problem.name);
    CHECK(c.problem.name == e.problem.name);
    CHECK(c.problem.n == e.problem.n);
    CHECK(c.problem.scaled == e.problem.scaled);
    CHECK(c.problem.family == e.problem.family);
    CHECK(std::get<KeplerPerturbation>(c.problem.perturbation) == std::get<KeplerPerturbation>(e.problem.perturbation));
    CHECK(c.problem.index_rule.kind == IndexRule::Kind::builtin);
    CHECK(c.lambda_minus == e.lambda_minus);
    CHECK(c.lambda_plus == e.lambda_plus);
  }
}

TEST_CASE("minimal config and defaults") {
  const ProblemConfig c = parse_config(kMinimal);
  CHECK(c.problem.n == 2);
  CHECK(std::holds_alternative<NoPerturbation>(c.problem.perturbation));
  CHECK(c.analyze.tol == kDefaultTol);
  CHECK(c.analyze.grid == 512);
  CHECK(c.galerkin.modes == 32);
  CHECK(c.problem.linear_part(0.25)(0, 0) == 4.25);
}

TEST_CASE("named constants and mirrored entries") {
  const ProblemConfig c = parse_config(R"(format_version = 1
[problem]
n = 2
[matrix]
1 1 = (0, pi)
1 2 = (0, -sqrt2) (2, sqrt10)
2 1 = (2, sqrt10) (0, -sqrt2)   # same polynomial, other order
2 2 = (0, +sqrt5) (1, sqrt3)
[interval]
lambda_minus = -pi
lambda_plus = 2.5e-1
)");
  const SymmetricMatrix a = c.problem.family.at(1.0);
  CHECK(a(0, 0) == std::numbers::pi);
  CHECK(a(0, 1) == doctest::Approx(std::sqrt(10.0) - std::sqrt(2.0)));
  CHECK(a(1, 0) == a(0, 1));
  CHECK(a(1, 1) == doctest::Approx(std::sqrt(5.0) + std::sqrt(3.0)));
  CHECK(c.lambda_minus == -std::numbers::pi);
  CHECK(c.lambda_plus == 0.25);
}

TEST_CASE("parse errors carry the line") {
  const std::string base = kMinimal;
  CHECK(parse_error_line(base) == -1);
  CHECK(parse_error_line(base + "2 1 = (0, 1)\n") == 10);  // matrix line inside [interval]
  CHECK(parse_error_line("format_version = 2\n") == 1);
  CHECK(parse_error_line("[problem]\nn = 0\n") == 2);
  CHECK(parse_error_line("format_version = 1\n[nonsense]\n") == 2);
  CHECK(parse_error_line("format_version = 1\n[problem]\nn = 2\nn = 3\n") == 4);
  CHECK(parse_error_line("format_version = 1\n[problem]\nn = 2\n[matrix]\n1 1 = (0, 4\n") == 5);
  CHECK(parse_error_line("format_version = 1\n[problem]\nn = 2\n[matrix]\n1 1 = (0, fourish)\n") == 5);
  CHECK(parse_error_line("format_version = 1\n[problem]\nn = 2\n[matrix]\n1 2 = (0, 1)\n2 1 = (0, 1.5)\n"
                         "[interval]\nlambda_minus = 0\nlambda_plus = 1\n") == 6);
  CHECK(parse_error_line("format_version = 1\n[problem]\nn = 2\n[matrix]\n3 1 = (0, 1)\n"
                         "[interval]\nlambda_minus = 0\nlambda_plus = 1\n") == 5);
  CHECK(parse_error_line("format_version = 1\n[problem]\nn = 2\n[options]\ntol = -1\n") == 5);
  CHECK(parse_error_line("format_version = 1\nstray line\n") == 2);
  // Whole-file problems have no line.
  CHECK(parse_error_line("[problem]\nn = 2\n") == 0);
  CHECK(parse_error_line("format_version = 1\n[problem]\nn = 2\n[interval]\nlambda_minus = 1\nlambda_plus = 0\n") == 0);
  CHECK_THROWS_AS(load_config(kProblems / "does-not-exist.cfg"), ParseError);
}

TEST_CASE("semantic validation after parsing") {
  CHECK_THROWS_AS(parse_config("format_version = 1\n[problem]\nn = 1\nscaled = true\n[matrix]\n1 1 = (1, 1)\n"
                               "[interval]\nlambda_minus = 0\nlambda_plus = 1\n"),
                  PreconditionError);
  CHECK_THROWS_AS(parse_config("format_version = 1\n[problem]\nn = 1\n[perturbation]\nkind = kepler\na = -1\n"
                               "[interval]\nlambda_minus = 0\nlambda_plus = 1\n"),
                  DomainError);
}

TEST_CASE("format/parse round trip") {
  for (int i = 1; i <= 3; ++i) {
    ProblemConfig c = load_config(kProblems / ("example" + std::to_string(i) + ".cfg"));
    c.analyze.critical.push_back({"origin", RepDecomposition{{1, 0}, {2, 3}}});
    c.galerkin.jacobian = JacobianMethod::finite_difference;
    c.galerkin.tail_tol = 3e-12;
    CHECK(same_config(parse_config(format_config(c)), c));
  }
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 30; ++t) {
    ProblemConfig c;
    c.problem.name = "random" + std::to_string(t);
    c.problem.n = 2 + std::size_t(t % 4);
    c.problem.family = t % 2 ? gen::full_family(rng, c.problem.n) : gen::diagonal_family(rng, c.problem.n);
    c.problem.perturbation = KeplerPerturbation{0.6 + 0.5 * u(rng), t % 3 ? KeplerScale::constant : KeplerScale::lambda_squared};
    if (t % 4 == 0) c.problem.index_rule = IndexRule::user({{u(rng), 1}, {u(rng), -1}});
    c.lambda_minus = -1 + 0.1 * u(rng);
    c.lambda_plus = 1 + 0.1 * u(rng);
    c.analyze.tol = 1e-10 * (2 + u(rng));
    const ProblemConfig back = parse_config(format_config(c));
    CHECK(same_config(back, c));
    CHECK(format_config(back) == format_config(c));
  }
}
