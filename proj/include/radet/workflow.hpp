#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "radet/cfar.hpp"
#include "radet/config.hpp"

namespace radet {

/// File locations inside an output directory:
///
///   <out>/manifest.json
///   <out>/<family>/{train,cal,verify,test}.bin
///   <out>/<family>/svdd.model, dsvdd.model, dsvdd_epochs.csv
///   <out>/report_<family>.csv
///   <out>/plots/*.svg
struct FamilyPaths {
  std::filesystem::path dir, train, cal, verify, test, svdd_model, dsvdd_model, epoch_log, report;
};
FamilyPaths family_paths(const std::filesystem::path& out, ClutterFamily family);
std::filesystem::path manifest_path(const std::filesystem::path& out);

/// 64-bit FNV-1a of a file's bytes, as 16 hex digits.
std::string fnv1a64_file(const std::filesystem::path& path);

void run_simulate(const RunConfig& config, const std::filesystem::path& out, std::ostream& log);
void run_fit(const RunConfig& config, const std::filesystem::path& out, std::ostream& log);

struct EvaluateResult {
  std::vector<std::pair<ClutterFamily, DetectionReport>> reports;
  bool any_failure() const;
  /// Every detector failed in every family.
  bool total_failure() const;
};
EvaluateResult run_evaluate(const RunConfig& config, const std::filesystem::path& out, std::ostream& log);

}  // namespace radet
