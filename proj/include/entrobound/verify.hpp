#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace entrobound {

struct CheckOutcome {
  std::string name;
  bool pass = false;
  double margin = 0.0;  // slack to the pinned tolerance (negative on failure)
  double seconds = 0.0;
  std::string detail;   // first counterexample / summary numbers
};

struct SuiteConfig {
  int max_log2_n = 20;
  std::int64_t window = 512;
  std::int64_t recurrence_k_max = 100;
  std::int64_t mc_samples = 1'000'000;
  std::int64_t slope_k_max = 1024;
  double rtol = 1e-9;
  bool enforce_runtime = true;
  int threads = 1;

  static SuiteConfig acceptance() { return SuiteConfig{}; }
  static SuiteConfig quick() {
    SuiteConfig c;
    c.max_log2_n = 10;
    c.window = 256;
    c.recurrence_k_max = 24;
    c.mc_samples = 100'000;
    c.slope_k_max = 256;
    c.rtol = 1e-7;
    c.enforce_runtime = false;
    return c;
  }
};

// Runs the full invariant suite (sandwich, optimality ratios, Table-1 matrix,
// appendix equivalences, tail recurrence, volume validation, oracle brackets,
// monotonicity/scaling, certified truncation). Outcomes are ordered and
// deterministic.
std::vector<CheckOutcome> run_verification(const SuiteConfig& cfg);

}  // namespace entrobound
