#include "equideg/catalog.hpp"

#include <cmath>

namespace equideg::catalog {

namespace {
ProblemSpec diagonal_problem(std::string name, const std::vector<Polynomial>& diag, KeplerScale scale) {
  ProblemSpec p;
  p.name = std::move(name);
  p.n = diag.size();
  p.family = MatrixFamily(p.n);
  for (std::size_t i = 0; i < diag.size(); ++i) p.family.set_entry(i, i, diag[i]);
  p.perturbation = KeplerPerturbation{1.0, scale};
  p.index_rule = IndexRule::builtin();
  return p;
}
}  // namespace

Entry example1() {
  const double s2 = std::sqrt(2.0), s5 = std::sqrt(5.0);
  return {diagonal_problem("example1",
                           {{{2, 1.0}, {0, -1.0}}, {{0, s2}, {1, 1.0}}, {{1, 1.0}, {0, -s2}}, {{0, s5}, {1, 1.0}}},
                           KeplerScale::lambda_squared),
          -1.0, 1.0};
}

Entry example2() {
  return {diagonal_problem("example2", {{{0, 4.0}, {1, 1.0}}, {{0, 2.0}}, {{0, 2.0}}, {{0, 2.0}}},
                           KeplerScale::constant),
          -0.5, 0.5};
}

Entry example3() {
  const double s10 = std::sqrt(10.0);
  return {diagonal_problem("example3",
                           {{{0, 4.0}, {2, 0.5}},
                            {{3, 1.0}, {0, -s10}},
                            {{0, 9.0}, {2, 0.5}},
                            {{3, 1.0}, {0, s10}},
                            {{0, 25.0}, {2, 0.5}}},
                           KeplerScale::constant),
          -1.0, 1.0};
}

std::vector<Entry> all() { return {example1(), example2(), example3()}; }

}  // namespace equideg::catalog
