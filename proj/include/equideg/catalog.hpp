#pragma once

// The three reference problems, with their analysis intervals.

#include <string>
#include <vector>

#include "equideg/problem.hpp"

namespace equideg::catalog {

struct Entry {
  ProblemSpec problem;
  double lambda_minus = 0;
  double lambda_plus = 0;
};

// n=4, A(l) = diag(l^2-1, sqrt2+l, l-sqrt2, sqrt5+l), eta = -l^2/sqrt(|x|^2+1), [-1, 1].
Entry example1();
// n=4, A(l) = diag(4+l, 2, 2, 2), eta = -1/sqrt(|x|^2+1), [-1/2, 1/2].
Entry example2();
// n=5, A(l) = diag(4+l^2/2, l^3-sqrt10, 9+l^2/2, l^3+sqrt10, 25+l^2/2), [-1, 1].
Entry example3();

std::vector<Entry> all();

}  // namespace equideg::catalog
