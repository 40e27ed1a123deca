#include <random>
#include <vector>

#include "doctest.h"
#include "equideg/error.hpp"
#include "equideg/udring.hpp"
#include "generators.hpp"

using equideg::TomDieckElement;

namespace {
bool trimmed(const TomDieckElement& e) {
  for (const auto& [k, v] : e.coeffs())
    if (v == 0 || k < 1) return false;
  return true;
}
}  // namespace

TEST_CASE("add") {
  const TomDieckElement alpha(5, {{1, 2}, {7, -3}});
  CHECK(TomDieckElement::zero() + alpha == alpha);
  CHECK(TomDieckElement(1, {{1, 2}}) + TomDieckElement(3, {{1, -2}}) == TomDieckElement(4, {}));
  CHECK((TomDieckElement(1, {{1, 2}}) + TomDieckElement(3, {{1, -2}})).coeffs().empty());
  CHECK(TomDieckElement(2, {{3, 5}}) + TomDieckElement(-2, {{2, 1}}) == TomDieckElement(0, {{2, 1}, {3, 5}}));
}

TEST_CASE("star") {
  const TomDieckElement alpha(-2, {{2, 9}, {4, 1}});
  CHECK(star(TomDieckElement::unit(), alpha) == alpha);
  CHECK(star(TomDieckElement::zero(), alpha) == TomDieckElement::zero());
  CHECK(star(TomDieckElement(1, {{1, 2}}), TomDieckElement(3, {{2, 4}})) == TomDieckElement(3, {{1, 6}, {2, 4}}));
}

TEST_CASE("scalar_mul") {
  const TomDieckElement alpha(3, {{5, 2}});
  CHECK(scalar_mul(0, alpha) == TomDieckElement::zero());
  CHECK(scalar_mul(1, alpha) == alpha);
  CHECK(scalar_mul(-1, TomDieckElement(1, {{2, 3}})) == TomDieckElement(-1, {{2, -3}}));
}

TEST_CASE("product") {
  const TomDieckElement alpha(2, {{1, 1}}), beta(-1, {{3, 4}});
  CHECK(equideg::product({}) == TomDieckElement::unit());
  const std::vector<TomDieckElement> one{alpha};
  CHECK(equideg::product(one) == alpha);
  const std::vector<TomDieckElement> three{alpha, TomDieckElement::zero(), beta};
  CHECK(equideg::product(three) == TomDieckElement::zero());
}

TEST_CASE("construction trims and rejects bad keys") {
  CHECK(TomDieckElement(0, {{3, 0}}).is_zero());
  CHECK_THROWS_AS(TomDieckElement(1, {{0, 1}}), equideg::InvariantError);
  CHECK(TomDieckElement(4, {{2, -1}}).to_string() == "(4; {2: -1})");
}

TEST_CASE("overflow is an error") {
  const TomDieckElement big(INT64_MAX, {});
  CHECK_THROWS_AS(add(big, TomDieckElement::unit()), equideg::OverflowError);
  CHECK_THROWS_AS(star(big, TomDieckElement(2, {})), equideg::OverflowError);
}

TEST_CASE("ring laws on random triples") {
  std::mt19937_64 rng(20240611);
  for (int t = 0; t < 1000; ++t) {
    const auto a = gen::ring_element(rng), b = gen::ring_element(rng), c = gen::ring_element(rng);
    CHECK(add(a, b) == add(b, a));
    CHECK(star(a, b) == star(b, a));
    CHECK(add(add(a, b), c) == add(a, add(b, c)));
    CHECK(star(star(a, b), c) == star(a, star(b, c)));
    CHECK(star(a, add(b, c)) == add(star(a, b), star(a, c)));
    CHECK(add(a, scalar_mul(-1, a)) == TomDieckElement::zero());
    CHECK(star(TomDieckElement::unit(), a) == a);
    CHECK(add(TomDieckElement::zero(), a) == a);
    CHECK(trimmed(add(a, b)));
    CHECK(trimmed(star(a, b)));
    CHECK(trimmed(scalar_mul(-1, a)));
  }
}
