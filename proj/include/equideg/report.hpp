#pragma once

// Machine-readable output: BifurcationReport as JSON (round-trips exactly),
// continuation branches as CSV plus a JSON summary. Every format carries
// format_version = 1.

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "equideg/bifurcation.hpp"
#include "equideg/galerkin.hpp"

namespace equideg {

std::string serialize_report(const BifurcationReport& r, int indent = 2);
// Throws ParseError on malformed JSON or an unsupported format_version.
BifurcationReport parse_report(std::string_view json);

// Human-readable summary of the same content.
std::string format_report_text(const BifurcationReport& r);

// Header comment lines, then one row per branch point:
//   lambda,amplitude,residual_norm,min_period_divisor,c0,c1,...
// coefficients in FourierLoop order, all reals with 17 significant digits.
void write_branch_csv(std::ostream& os, const Branch& b);

std::string branch_summary_json(const std::vector<Branch>& branches, int indent = 2);

}  // namespace equideg
