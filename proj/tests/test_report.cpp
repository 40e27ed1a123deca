#include <filesystem>
#include <random>
#include <sstream>

#include "doctest.h"
#include "equideg/catalog.hpp"
#include "equideg/config.hpp"
#include "equideg/error.hpp"
#include "equideg/report.hpp"
#include "generators.hpp"
#include "json.hpp"

using namespace equideg;

TEST_CASE("report JSON round-trips") {
  AnalyzeOptions o;
  o.critical.push_back({"origin", RepDecomposition{{1, 1}}});
  for (const auto& e : catalog::all()) {
    const BifurcationReport r = analyze(e.problem, e.lambda_minus, e.lambda_plus, o);
    const std::string text = serialize_report(r);
    CHECK(parse_report(text) == r);
    CHECK(serialize_report(parse_report(text)) == text);
  }
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    ProblemSpec p;
    p.name = "random";
    p.n = 2 + std::size_t(t % 3);
    p.family = gen::diagonal_family(rng, p.n);
    p.perturbation = KeplerPerturbation{};
    const BifurcationReport r = analyze(p, -1.0, 1.0);
    CHECK(parse_report(serialize_report(r, -1)) == r);
  }
  SUBCASE("scaled problem with eqcont3 points") {
    ProblemSpec p;
    p.name = "scaled";
    p.n = 2;
    p.family = MatrixFamily::constant(SymmetricMatrix::diagonal({8, -3}));
    p.perturbation = KeplerPerturbation{1.0, KeplerScale::constant};
    p.scaled = true;
    const BifurcationReport r = analyze(p, 0.5, 1.5);
    CHECK(!r.eqcont3.empty());
    CHECK(parse_report(serialize_report(r)) == r);
  }
}

TEST_CASE("report schema") {
  const auto e = catalog::example2();
  const auto j = nlohmann::json::parse(serialize_report(analyze(e.problem, e.lambda_minus, e.lambda_plus)));
  CHECK(j.at("format_version") == 1);
  CHECK(j.at("verdict").at("criterion") == "eqcont2(ii)");
  CHECK(j.at("bif").at("so2") == 0);
  CHECK(j.at("bif").at("zk").at("2") == 1);
  CHECK(j.at("resonances").at(0).at("kernel_rep") == nlohmann::json::parse("[[1, 2]]"));
  CHECK(j.at("predicted_periods").at(0).at("text") == "{pi}");
}

TEST_CASE("same input gives byte-identical reports") {
  const ProblemConfig c = load_config(std::filesystem::path(EQUIDEG_PROBLEMS_DIR) / "example3.cfg");
  const std::string a = serialize_report(analyze(c.problem, c.lambda_minus, c.lambda_plus, c.analyze));
  const std::string b = serialize_report(analyze(c.problem, c.lambda_minus, c.lambda_plus, c.analyze));
  CHECK(a == b);
}

TEST_CASE("malformed report JSON") {
  CHECK_THROWS_AS(parse_report("{"), ParseError);
  CHECK_THROWS_AS(parse_report("{\"format_version\": 1}"), ParseError);
  const auto e = catalog::example1();
  auto j = nlohmann::json::parse(serialize_report(analyze(e.problem, e.lambda_minus, e.lambda_plus)));
  j["format_version"] = 7;
  CHECK_THROWS_AS(parse_report(j.dump()), ParseError);
}

TEST_CASE("branch CSV layout") {
  Branch b;
  b.k0 = 2;
  b.lambda0 = 0;
  BranchPoint pt;
  pt.loop = FourierLoop(1, 2);
  pt.loop.acos(2)[0] = 0.1;
  pt.lambda = -1.0 / 3.0;
  pt.amplitude = 0.1;
  pt.residual_norm = 1e-12;
  pt.min_period_divisor = 2;
  b.points.push_back(pt);
  std::ostringstream os;
  write_branch_csv(os, b);
  std::istringstream in(os.str());
  std::string line, last;
  int comments = 0;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) ++comments;
    last = line;
  }
  CHECK(os.str().rfind("# format_version=1\n", 0) == 0);
  CHECK(comments == 3);
  CHECK(last == "-0.33333333333333331,0.10000000000000001,9.9999999999999998e-13,2,0,0,0,0.10000000000000001,0");
  const auto summary = nlohmann::json::parse(branch_summary_json({b}));
  CHECK(summary.at("branches").at(0).at("measured_period_divisors") == nlohmann::json::parse("[2]"));
}
