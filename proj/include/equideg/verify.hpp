#pragma once

// Self-check of the worked examples and the algebraic/numerical laws the
// library relies on; one row per check. Used by `equideg verify-examples`.

#include <string>
#include <vector>

namespace equideg {

struct VerifyRow {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
};

struct VerifyOptions {
  // Mutation for negative controls: "" (none), "jk" (every j_k read is off
  // by one), "ring" (products are perturbed), "eigen" (eigenvalues shifted
  // by 1e-6), "period" (measured periods doubled).
  std::string fault;
  unsigned seed = 20240611;
};

std::vector<VerifyRow> run_verification(const VerifyOptions& opts = {});
std::string verify_rows_json(const std::vector<VerifyRow>& rows, int indent = 2);
std::string verify_rows_table(const std::vector<VerifyRow>& rows);

}  // namespace equideg
