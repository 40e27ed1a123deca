#pragma once

// Declarative problem files:
//
//   format_version = 1
//   [problem]       name, n, scaled
//   [matrix]        "i j = (power, coeff) (power, coeff) ..."  (1-based,
//                   upper or lower triangle; a mirrored entry must agree)
//   [perturbation]  kind = none | kepler, a, scale = constant | lambda^2
//   [index]         rule = builtin | unavailable | table, "at = lambda ind"
//   [interval]      lambda_minus, lambda_plus
//   [options]       tol, grid, modes, max_modes, newton_tol, max_iter, tail_tol
//   [critical]      "label = (multiplicity, frequency) ..."
//
// '#' starts a comment. Numbers may be written as the named constants pi,
// sqrt2, sqrt3, sqrt5, sqrt10, optionally signed.

#include <filesystem>
#include <string>
#include <string_view>

#include "equideg/bifurcation.hpp"
#include "equideg/galerkin.hpp"
#include "equideg/problem.hpp"

namespace equideg {

struct ProblemConfig {
  int format_version = 1;
  ProblemSpec problem;
  double lambda_minus = 0, lambda_plus = 0;
  AnalyzeOptions analyze;
  GalerkinOptions galerkin;
};

// Throws ParseError (with the offending line) on malformed input and
// PreconditionError when the resulting problem fails validation.
ProblemConfig parse_config(std::string_view text);
ProblemConfig load_config(const std::filesystem::path& path);
// Canonical text; parse_config(format_config(c)) reproduces c.
std::string format_config(const ProblemConfig& c);

// Field-wise equality (ProblemSpec itself may hold callables).
bool same_config(const ProblemConfig& a, const ProblemConfig& b);

}  // namespace equideg
