#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "radet/classical.hpp"
#include "radet/dsvdd.hpp"
#include "radet/scene.hpp"
#include "radet/svdd.hpp"

namespace radet {

enum class DetectorTag { mf_true, amf_scm, anmf_tyler, svdd, dsvdd, nmf_true };

std::string to_string(DetectorTag tag);
DetectorTag parse_detector_tag(const std::string& text);
bool is_learned(DetectorTag tag);

/// Scores one cell against a hypothesized Doppler bin. Learned detectors
/// ignore the bin.
using CellScorer = std::function<double(const ComplexVector& cell, int doppler)>;

/// A detector as the harness sees it. `prepare` does the per-sample work
/// that does not depend on the cell (covariance estimation from the
/// secondary block), so one estimate can score many candidate cells.
struct DetectorHandle {
  DetectorTag tag;
  std::function<CellScorer(const Sample&)> prepare;
  /// Optional batched path for detectors that ignore the secondary block and
  /// the bin; must return exactly what `prepare` would score per cell.
  std::function<std::vector<double>(const std::vector<ComplexVector>&)> score_batch;

  double score(const Sample& sample, int doppler) const { return prepare(sample)(sample.cell, doppler); }
};

/// mf_true / nmf_true use the scenario's total covariance; amf_scm and
/// anmf_tyler estimate from each sample's secondary block.
DetectorHandle make_classical_detector(DetectorTag tag, const Scenario& scn,
                                       const TylerOptions& tyler_options = {});
DetectorHandle make_svdd_detector(std::shared_ptr<const SvddModel> model);
DetectorHandle make_dsvdd_detector(std::shared_ptr<const DsvddModel> model);

/// The ceil((1 - pfa) N)-th smallest score (1-based). At most floor(pfa N)
/// scores strictly exceed it. Requires N >= 1/pfa and finite scores.
double calibrate_threshold(std::span<const double> scores, double pfa);

/// Fraction of scores strictly above the threshold.
double exceedance_fraction(std::span<const double> scores, double threshold);

struct PdEstimate {
  double pd = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n_trials = 0;
};

/// Wilson score interval, 95% two-sided by default.
PdEstimate wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

PdEstimate estimate_pd(std::span<const double> h1_scores, double threshold);
/// Scores each H1 sample at its own target Doppler bin.
PdEstimate estimate_pd(const DetectorHandle& detector, double threshold, const std::vector<Sample>& test);

/// Bin assigned to target-free sample `index` when a classical statistic
/// needs a steering vector: the scenario's bins taken round-robin.
int h0_doppler(const Scenario& scn, std::size_t index);

std::vector<double> h0_scores(const DetectorHandle& detector, const Scenario& scn,
                              const std::vector<Sample>& h0);
double verify_pfa(const DetectorHandle& detector, double threshold, const Scenario& scn,
                  const std::vector<Sample>& fresh_h0);

struct ReportRow {
  std::string detector;
  std::string clutter_family;
  int doppler_bin = 0;
  double snr_db = 0.0;
  double pd = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n_trials = 0;
  double threshold = 0.0;
  double empirical_pfa = 0.0;
};

struct DetectorFailure {
  std::string detector;
  std::string message;
};

struct DetectionReport {
  std::vector<ReportRow> rows;
  std::vector<DetectorFailure> failures;  // rows of failed detectors carry NaN
};

/// For every detector: calibrate on `cal`, check the false-alarm rate on
/// `verify`, then score the test cells of every (Doppler, SNR) grid point.
/// Test cells are built from `test_interference` and are identical for all
/// detectors. A detector that throws is recorded in `failures` and the
/// remaining detectors still run.
DetectionReport run_experiment(const SceneGenerator& gen, const std::vector<DetectorHandle>& detectors,
                               const std::vector<Sample>& cal, const std::vector<Sample>& verify,
                               const std::vector<Sample>& test_interference);

/// Header: detector,clutter_family,doppler_bin,snr_db,pd,ci_low,ci_high,n_trials,threshold,empirical_pfa
void write_report_csv(const std::filesystem::path& path, const DetectionReport& report);
std::string report_csv(const DetectionReport& report);
DetectionReport read_report_csv(const std::filesystem::path& path);

/// Mean Pd over Doppler bins at one SNR for one detector; NaN if absent.
double mean_pd_over_bins(const DetectionReport& report, const std::string& detector, double snr_db);
double pd_at(const DetectionReport& report, const std::string& detector, int doppler, double snr_db);

}  // namespace radet
