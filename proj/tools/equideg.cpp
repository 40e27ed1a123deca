// equideg: analyze | continue | verify-examples
//
// Exit codes: analyze 0 = a criterion fired, 2 = none fired; continue 0 = all
// branches complete, 2 = some branch truncated; verify-examples 0 = all rows
// pass, 2 = some row failed; 1 = error (bad input, precondition, solver).

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "equideg/bifurcation.hpp"
#include "equideg/config.hpp"
#include "equideg/error.hpp"
#include "equideg/galerkin.hpp"
#include "equideg/report.hpp"
#include "equideg/verify.hpp"

using namespace equideg;

namespace {

std::vector<double> parse_amplitudes(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tok.size() || !(v > 0)) throw PreconditionError("invalid amplitude '" + tok + "'");
    out.push_back(v);
  }
  if (out.empty()) throw PreconditionError("no amplitudes given");
  return out;
}

int cmd_analyze(const std::string& path, std::optional<double> tol, std::optional<int> grid, bool json) {
  ProblemConfig cfg = load_config(path);
  if (tol) cfg.analyze.tol = *tol;
  if (grid) cfg.analyze.grid = *grid;
  const BifurcationReport r = analyze(cfg.problem, cfg.lambda_minus, cfg.lambda_plus, cfg.analyze);
  std::cout << (json ? serialize_report(r) + "\n" : format_report_text(r));
  return r.verdict.holds() ? 0 : 2;
}

int cmd_continue(const std::string& path, double resonance, const std::string& amplitudes, std::optional<int> modes,
                 const std::string& out_path) {
  const ProblemConfig cfg = load_config(path);
  const std::vector<double> amps = parse_amplitudes(amplitudes);
  ScanOptions so;
  so.tol = cfg.analyze.tol;
  so.grid = cfg.analyze.grid;
  const ScanResult scan = scan_resonances(cfg.problem.effective_family(), cfg.lambda_minus, cfg.lambda_plus, so);
  std::vector<ResonancePoint> all = scan.interior;
  all.insert(all.end(), scan.at_lower.begin(), scan.at_lower.end());
  all.insert(all.end(), scan.at_upper.begin(), scan.at_upper.end());
  const ResonancePoint* match = nullptr;
  const double window = std::max(1e-6, 1e3 * cfg.analyze.tol) * (1 + std::abs(resonance));
  for (const auto& r : all)
    if (std::abs(r.lambda0 - resonance) <= window && (!match || std::abs(r.lambda0 - resonance) < std::abs(match->lambda0 - resonance)))
      match = &r;
  if (!match) {
    std::ostringstream os;
    os << "no resonance near lambda = " << resonance << "; scanned:";
    for (const auto& r : all) os << " " << r.lambda0;
    throw PreconditionError(os.str());
  }
  ContinuationOptions opts;
  static_cast<GalerkinOptions&>(opts) = cfg.galerkin;
  if (modes) opts.modes = *modes;
  const std::vector<Branch> branches = continue_to_infinity(cfg.problem, *match, amps, opts);
  if (out_path.empty()) {
    for (const auto& b : branches) write_branch_csv(std::cout, b);
    std::cerr << branch_summary_json(branches) << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) throw PreconditionError("cannot write '" + out_path + "'");
    for (const auto& b : branches) write_branch_csv(out, b);
    std::cout << branch_summary_json(branches) << "\n";
  }
  for (const auto& b : branches)
    if (b.failed) return 2;
  return 0;
}

int cmd_verify(bool json, const std::string& fault) {
  VerifyOptions o;
  o.fault = fault;
  const auto rows = run_verification(o);
  std::cout << (json ? verify_rows_json(rows) + "\n" : verify_rows_table(rows));
  for (const auto& r : rows)
    if (!r.pass) return 2;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equivariant degree bifurcation analysis for second-order Hamiltonian systems"};
  app.require_subcommand(1);

  std::string cfg_path;
  std::optional<double> tol;
  std::optional<int> grid;
  bool json = false;
  auto* analyze_cmd = app.add_subcommand("analyze", "Bifurcation invariants and criteria for a problem file");
  analyze_cmd->add_option("config", cfg_path, "problem file")->required()->check(CLI::ExistingFile);
  analyze_cmd->add_option("--tol", tol, "relative spectral tolerance")->check(CLI::PositiveNumber);
  analyze_cmd->add_option("--grid", grid, "resonance scan grid size")->check(CLI::PositiveNumber);
  analyze_cmd->add_flag("--json", json, "emit the report as JSON");

  double resonance = 0;
  std::string amplitudes, out_path;
  std::optional<int> modes;
  auto* continue_cmd = app.add_subcommand("continue", "Continue periodic orbits from a resonance toward infinity");
  continue_cmd->add_option("config", cfg_path, "problem file")->required()->check(CLI::ExistingFile);
  continue_cmd->add_option("--resonance", resonance, "lambda0 of a scanned resonance")->required();
  continue_cmd->add_option("--amplitudes", amplitudes, "increasing comma-separated amplitudes")->required();
  continue_cmd->add_option("--modes", modes, "initial Fourier truncation N")->check(CLI::PositiveNumber);
  continue_cmd->add_option("--out", out_path, "branch CSV (summary JSON then goes to stdout)");

  bool verify_json = false;
  std::string fault;
  auto* verify_cmd = app.add_subcommand("verify-examples", "Check the worked examples and library laws");
  verify_cmd->add_flag("--json", verify_json, "emit the table as JSON");
  verify_cmd->add_option("--inject-fault", fault, "negative control: jk | ring | eigen | period");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*analyze_cmd) return cmd_analyze(cfg_path, tol, grid, json);
    if (*continue_cmd) return cmd_continue(cfg_path, resonance, amplitudes, modes, out_path);
    if (*verify_cmd) return cmd_verify(verify_json, fault);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
