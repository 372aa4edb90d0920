#pragma once

#include <string>
#include <vector>

// Deterministic verification suites, shared by the `gradcheck` CLI command
// and the acceptance tests. The gradient suite runs central finite
// differences (64-bit path, delta 1e-4) against every hand-written backward,
// primitives at 1e-5 and full network composites at 1e-4 maximum relative
// error; the oracle suite compares fast paths against the independent loop
// implementations in medgan::oracle.

namespace medgan::gradcheck {

struct CheckResult {
  std::string name;
  double max_err = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

std::vector<CheckResult> gradient_suite();
std::vector<CheckResult> oracle_suite();

bool all_pass(const std::vector<CheckResult>& results);

}  // namespace medgan::gradcheck
