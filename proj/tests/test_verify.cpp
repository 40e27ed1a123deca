#include <set>

#include "doctest.h"
#include "equideg/error.hpp"
#include "equideg/verify.hpp"
#include "json.hpp"

using namespace equideg;

TEST_CASE("verification table passes on a fresh build") {
  const auto rows = run_verification();
  REQUIRE(rows.size() == 10);
  for (const auto& r : rows) {
    CAPTURE(r.detail);
    CHECK(r.pass);
  }
  const auto j = nlohmann::json::parse(verify_rows_json(rows));
  CHECK(j.at("all_pass") == true);
  CHECK(verify_rows_table(rows).find("FAIL") == std::string::npos);
}

TEST_CASE("injected faults are caught") {
  auto failing = [](const std::string& fault) {
    VerifyOptions o;
    o.fault = fault;
    std::set<int> ids;
    for (const auto& r : run_verification(o))
      if (!r.pass) ids.insert(r.id);
    return ids;
  };
  CHECK(failing("jk") == std::set<int>{1, 2, 3, 8});
  CHECK(failing("ring").count(5) == 1);
  CHECK(failing("eigen") == std::set<int>{8});
  CHECK(failing("period") == std::set<int>{9});
  VerifyOptions bad;
  bad.fault = "nope";
  CHECK_THROWS_AS(run_verification(bad), PreconditionError);
}
