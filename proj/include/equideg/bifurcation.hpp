#pragma once

// Bifurcation indices at infinity and the criteria built on them.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "equideg/problem.hpp"
#include "equideg/reps.hpp"
#include "equideg/spectral.hpp"
#include "equideg/udring.hpp"

namespace equideg {

struct BifIndex {
  TomDieckElement value;
  // Z_k coordinates that the resonant-endpoint route cannot determine
  // (k >= 1 resonant at an endpoint). Empty on the nonresonant route.
  std::set<int> undefined;
  bool resonant_endpoints = false;

  friend bool operator==(const BifIndex&, const BifIndex&) = default;
};

BifIndex bif_index_full(const ProblemSpec& p, double lm, double lp, double tol = kDefaultTol);
TomDieckElement bif_index(const ProblemSpec& p, double lm, double lp, double tol = kDefaultTol);
std::int64_t bif_index_ls(const ProblemSpec& p, double lm, double lp, double tol = kDefaultTol);

enum class Criterion { none, eqcont1_i, eqcont1_ii, eqcont2_i, eqcont2_ii, eqcont3 };

std::string criterion_name(Criterion c);
Criterion criterion_from_name(const std::string& s);

struct Verdict {
  Criterion criterion = Criterion::none;
  int witness_k = 0;                // (ii) variants and eqcont3
  std::set<int> kset;               // eqcont1
  std::optional<double> lambda0;    // eqcont2 / eqcont3: where C meets infinity
  std::optional<double> alpha0;     // eqcont3
  std::string explanation;

  bool holds() const { return criterion != Criterion::none; }
  friend bool operator==(const Verdict&, const Verdict&) = default;
};

// Resonant or nonresonant endpoints; needs the index at infinity.
Verdict check_eqcont1(const ProblemSpec& p, double lm, double lp, double tol = kDefaultTol);
// Requires exactly one interior resonance and nonresonant endpoints, else
// PreconditionError listing what the scan found.
Verdict check_eqcont2(const ProblemSpec& p, double lm, double lp, const ScanOptions& opts = {});

struct Eqcont3Contribution {
  int k = 0;
  double alpha = 0;
  int multiplicity = 0;
  friend bool operator==(const Eqcont3Contribution&, const Eqcont3Contribution&) = default;
};

struct Eqcont3Point {
  double lambda0 = 0;
  int k0 = 0;
  double alpha0 = 0;
  std::int64_t bif_zk0 = 0;  // ind * mu_A(alpha0), summed when merged
  bool merged = false;       // several (k, alpha) give this lambda0
  std::vector<Eqcont3Contribution> contributions;
  friend bool operator==(const Eqcont3Point&, const Eqcont3Point&) = default;
};

struct Eqcont3Result {
  std::vector<Eqcont3Point> points;  // ascending lambda0
  std::vector<std::string> warnings;
};

// Scaled problems: all lambda0 = k / sqrt(alpha) in [lo, hi], 0 < lo < hi.
Eqcont3Result eqcont3_points(const ProblemSpec& p, double lo, double hi, double tol = kDefaultTol);

// Candidate minimal periods 2 pi / g, stored as the divisors g, plus the
// constant-solution period 0.
struct PeriodSet {
  bool includes_zero = false;
  std::set<int> divisors;

  std::vector<double> periods() const;  // descending: 0 last
  std::string to_string() const;
  friend bool operator==(const PeriodSet&, const PeriodSet&) = default;
};

PeriodSet predict_periods(const ResonancePoint& r);

struct ConsistencyVerdict {
  bool consistent = false;
  bool hypothesis_holds = false;  // "not consistent": symmetry breaking applies
  std::string explanation;
  friend bool operator==(const ConsistencyVerdict&, const ConsistencyVerdict&) = default;
};

ConsistencyVerdict consistency_check(const RepDecomposition& kernel_at_point, const RepDecomposition& kernel_at_infinity);

struct CriticalPoint {
  std::string label;
  RepDecomposition kernel;
  friend bool operator==(const CriticalPoint&, const CriticalPoint&) = default;
};

struct ConsistencyEntry {
  std::string label;
  double lambda0 = 0;
  ConsistencyVerdict verdict;
  friend bool operator==(const ConsistencyEntry&, const ConsistencyEntry&) = default;
};

struct AnalyzeOptions {
  double tol = kDefaultTol;
  int grid = 512;
  std::vector<CriticalPoint> critical;
};

struct BifurcationReport {
  int format_version = 1;
  std::string problem;
  std::size_t dimension = 0;
  bool scaled = false;
  double lambda_minus = 0, lambda_plus = 0;
  double tol = kDefaultTol;
  int grid = 512;
  SpectralData spectrum_minus, spectrum_plus;
  std::set<int> kset;
  std::optional<int> ind_minus, ind_plus;
  std::optional<TomDieckElement> bif;
  std::set<int> bif_undefined;
  std::optional<std::int64_t> bif_ls;
  Verdict verdict;
  std::vector<ResonancePoint> resonances;   // interior, ascending
  std::vector<ResonancePoint> endpoint_resonances;
  std::vector<PeriodSet> predicted_periods;  // aligned with resonances
  std::vector<Eqcont3Point> eqcont3;
  std::vector<ConsistencyEntry> consistency;
  // Replacement hypotheses for bounded stationary sets: (a) K empty is
  // checked; (b) bounded zeros of grad V is known only for the builtin class.
  bool hypothesis_a_kset_empty = false;
  std::string hypothesis_b_bounded_zeros;  // "builtin" | "asserted-by-user"
  std::vector<std::string> warnings;

  friend bool operator==(const BifurcationReport&, const BifurcationReport&) = default;
};

BifurcationReport analyze(const ProblemSpec& p, double lm, double lp, const AnalyzeOptions& opts = {});

}  // namespace equideg
