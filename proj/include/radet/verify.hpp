#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "radet/scene.hpp"

namespace radet {

struct CheckResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  Scenario scenario = Scenario::paper_defaults(ClutterFamily::compound_gaussian);
  std::size_t monte_carlo = 100000;
  std::uint64_t seed = 20251016;
  /// Deliberate corruptions the suite must catch. Known: "tyler".
  std::set<std::string> faults;
};

/// Null distributions of MF/NMF, Tyler invariances, SVDD dual against a
/// projected-gradient oracle, threshold calibration and finite-difference
/// gradient checks of every network layer.
std::vector<CheckResult> run_oracle_suite(const VerifyOptions& options);

/// Fixed-width table, one row per check, followed by a pass/fail summary.
std::string format_checks(const std::vector<CheckResult>& checks);

}  // namespace radet
