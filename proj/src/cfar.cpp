#include "radet/cfar.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>

#include "radet/classical.hpp"
#include "radet/error.hpp"
#include "radet/parallel.hpp"

namespace radet {

std::string to_string(DetectorTag tag) {
  switch (tag) {
    case DetectorTag::mf_true: return "mf_true";
    case DetectorTag::amf_scm: return "amf_scm";
    case DetectorTag::anmf_tyler: return "anmf_tyler";
    case DetectorTag::svdd: return "svdd";
    case DetectorTag::dsvdd: return "dsvdd";
    case DetectorTag::nmf_true: return "nmf_true";
  }
  return "unknown";
}

DetectorTag parse_detector_tag(const std::string& text) {
  for (auto tag : {DetectorTag::mf_true, DetectorTag::amf_scm, DetectorTag::anmf_tyler, DetectorTag::svdd,
                   DetectorTag::dsvdd, DetectorTag::nmf_true}) {
    if (text == to_string(tag)) return tag;
  }
  fail(ErrorKind::validation, "unknown detector tag '" + text + "'");
}

bool is_learned(DetectorTag tag) { return tag == DetectorTag::svdd || tag == DetectorTag::dsvdd; }

namespace {

std::vector<ComplexVector> steering_table(std::size_t m) {
  std::vector<ComplexVector> table;
  for (std::size_t d = 0; d < m; ++d) table.push_back(steering_vector(static_cast<int>(d), m));
  return table;
}

const ComplexVector& steering_for(const std::vector<ComplexVector>& table, int d) {
  if (d < 0 || static_cast<std::size_t>(d) >= table.size()) {
    fail(ErrorKind::invalid_parameter, "detector: Doppler bin " + std::to_string(d) + " out of range");
  }
  return table[static_cast<std::size_t>(d)];
}

}  // namespace

DetectorHandle make_classical_detector(DetectorTag tag, const Scenario& scn, const TylerOptions& tyler_options) {
  auto table = std::make_shared<const std::vector<ComplexVector>>(steering_table(scn.m));
  switch (tag) {
    case DetectorTag::mf_true:
    case DetectorTag::nmf_true: {
      auto chol = std::make_shared<const CholeskyFactor>(scn.total_covariance());
      const bool normalized = tag == DetectorTag::nmf_true;
      return {tag, [=](const Sample&) -> CellScorer {
                return [=](const ComplexVector& cell, int d) {
                  const auto& p = steering_for(*table, d);
                  return normalized ? nmf_statistic(cell, *chol, p) : mf_statistic(cell, *chol, p);
                };
              }, nullptr};
    }
    case DetectorTag::amf_scm:
      return {tag, [=](const Sample& s) -> CellScorer {
                auto chol = std::make_shared<const CholeskyFactor>(scm(s.secondary).factor());
                return [=](const ComplexVector& cell, int d) {
                  return mf_statistic(cell, *chol, steering_for(*table, d));
                };
              }, nullptr};
    case DetectorTag::anmf_tyler:
      return {tag, [=](const Sample& s) -> CellScorer {
                // a non-converged fit still returns its last iterate; at the
                // default cap this is the estimate a bounded-work detector uses
                auto chol =
                    std::make_shared<const CholeskyFactor>(tyler_fit(s.secondary, tyler_options).estimate.factor());
                return [=](const ComplexVector& cell, int d) {
                  return nmf_statistic(cell, *chol, steering_for(*table, d));
                };
              }, nullptr};
    default:
      fail(ErrorKind::invalid_parameter, "make_classical_detector: " + to_string(tag) + " is not classical");
  }
}

DetectorHandle make_svdd_detector(std::shared_ptr<const SvddModel> model) {
  return {DetectorTag::svdd, [model](const Sample&) -> CellScorer {
            return [model](const ComplexVector& cell, int) { return svdd_score(cell, *model); };
          }, nullptr};
}

DetectorHandle make_dsvdd_detector(std::shared_ptr<const DsvddModel> model) {
  return {DetectorTag::dsvdd,
          [model](const Sample&) -> CellScorer {
            return [model](const ComplexVector& cell, int) { return dsvdd_score(cell, *model); };
          },
          [model](const std::vector<ComplexVector>& cells) { return dsvdd_scores(cells, *model); }};
}

double calibrate_threshold(std::span<const double> scores, double pfa) {
  if (!(pfa > 0.0 && pfa < 1.0)) fail(ErrorKind::invalid_parameter, "calibrate_threshold: pfa must lie in (0, 1)");
  const std::size_t n = scores.size();
  // number of scores allowed strictly above the threshold
  const auto allowed = static_cast<std::size_t>(std::floor(pfa * static_cast<double>(n) * (1.0 + 1e-12)));
  if (n == 0 || allowed < 1) {
    fail(ErrorKind::invalid_parameter, "calibrate_threshold: need at least 1/pfa scores, got " + std::to_string(n));
  }
  for (double s : scores) {
    if (!std::isfinite(s)) fail(ErrorKind::invalid_data, "calibrate_threshold: non-finite score");
  }
  std::vector<double> sorted(scores.begin(), scores.end());
  const std::size_t k = n - allowed - 1;  // zero-based ceil((1 - pfa) n) - 1
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end());
  return sorted[k];
}

double exceedance_fraction(std::span<const double> scores, double threshold) {
  if (scores.empty()) return 0.0;
  std::size_t above = 0;
  for (double s : scores) above += s > threshold ? 1 : 0;
  return static_cast<double>(above) / static_cast<double>(scores.size());
}

PdEstimate wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) fail(ErrorKind::invalid_parameter, "wilson_interval: zero trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return {p, std::clamp(center - half, 0.0, p), std::clamp(center + half, p, 1.0), trials};
}

PdEstimate estimate_pd(std::span<const double> h1_scores, double threshold) {
  if (h1_scores.empty()) fail(ErrorKind::invalid_parameter, "estimate_pd: empty test set");
  if (!std::isfinite(threshold)) fail(ErrorKind::invalid_parameter, "estimate_pd: threshold must be finite");
  std::size_t hits = 0;
  for (double s : h1_scores) hits += s > threshold ? 1 : 0;
  return wilson_interval(hits, h1_scores.size());
}

PdEstimate estimate_pd(const DetectorHandle& detector, double threshold, const std::vector<Sample>& test) {
  std::vector<double> scores(test.size());
  parallel_for(test.size(), [&](std::size_t i) {
    if (test[i].label != Label::h1 || !test[i].target) {
      fail(ErrorKind::invalid_data, "estimate_pd: test sample " + std::to_string(i) + " is not target-present");
    }
    scores[i] = detector.score(test[i], test[i].target->doppler);
  });
  return estimate_pd(scores, threshold);
}

int h0_doppler(const Scenario& scn, std::size_t index) {
  if (scn.doppler_bins.empty()) return 0;
  return scn.doppler_bins[index % scn.doppler_bins.size()];
}

std::vector<double> h0_scores(const DetectorHandle& detector, const Scenario& scn,
                              const std::vector<Sample>& h0) {
  std::vector<double> scores(h0.size());
  if (detector.score_batch) {
    constexpr std::size_t chunk = 256;
    parallel_for((h0.size() + chunk - 1) / chunk, [&](std::size_t c) {
      std::vector<ComplexVector> cells;
      for (std::size_t i = c * chunk; i < std::min(h0.size(), (c + 1) * chunk); ++i) cells.push_back(h0[i].cell);
      const auto part = detector.score_batch(cells);
      std::copy(part.begin(), part.end(), scores.begin() + static_cast<std::ptrdiff_t>(c * chunk));
    });
    return scores;
  }
  parallel_for(h0.size(), [&](std::size_t i) { scores[i] = detector.score(h0[i], h0_doppler(scn, i)); });
  return scores;
}

double verify_pfa(const DetectorHandle& detector, double threshold, const Scenario& scn,
                  const std::vector<Sample>& fresh_h0) {
  if (std::isinf(threshold) && threshold > 0.0) return 0.0;
  return exceedance_fraction(h0_scores(detector, scn, fresh_h0), threshold);
}

DetectionReport run_experiment(const SceneGenerator& gen, const std::vector<DetectorHandle>& detectors,
                               const std::vector<Sample>& cal, const std::vector<Sample>& verify,
                               const std::vector<Sample>& test_interference) {
  const Scenario& scn = gen.scenario();
  const std::string family = to_string(scn.family);
  const std::size_t n_det = detectors.size();
  const std::size_t n_bins = scn.doppler_bins.size();
  const std::size_t n_snr = scn.snr_grid_db.size();
  const std::size_t n_grid = n_bins * n_snr;
  const std::size_t n_test = test_interference.size();
  if (n_test == 0) fail(ErrorKind::invalid_parameter, "run_experiment: empty test split");

  DetectionReport report;
  std::vector<double> threshold(n_det, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> pfa(n_det, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> error(n_det);

  for (std::size_t k = 0; k < n_det; ++k) {
    try {
      threshold[k] = calibrate_threshold(h0_scores(detectors[k], scn, cal), scn.pfa);
      pfa[k] = verify_pfa(detectors[k], threshold[k], scn, verify);
    } catch (const std::exception& e) {
      error[k] = e.what();
    }
  }

  // hits[k][g] counted per record then reduced in index order
  std::vector<unsigned char> exceed(n_det * n_grid * n_test, 0);
  std::mutex error_mutex;
  parallel_for(n_test, [&](std::size_t i) {
    const Sample& record = test_interference[i];
    std::vector<CellScorer> scorers(n_det);
    for (std::size_t k = 0; k < n_det; ++k) {
      if (!error[k].empty()) continue;
      try {
        scorers[k] = detectors[k].prepare(record);
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        if (error[k].empty()) error[k] = e.what();
      }
    }
    std::vector<ComplexVector> cells;
    cells.reserve(n_grid);
    for (std::size_t b = 0; b < n_bins; ++b) {
      for (std::size_t s = 0; s < n_snr; ++s) {
        cells.push_back(gen.test_cell(record.cell, i, scn.snr_grid_db[s], scn.doppler_bins[b]));
      }
    }
    for (std::size_t k = 0; k < n_det; ++k) {
      if (!scorers[k]) continue;
      unsigned char* out = &exceed[k * n_grid * n_test];
      try {
        if (detectors[k].score_batch) {
          const auto scores = detectors[k].score_batch(cells);
          for (std::size_t g = 0; g < n_grid; ++g) out[g * n_test + i] = scores[g] > threshold[k] ? 1 : 0;
        } else {
          for (std::size_t g = 0; g < n_grid; ++g) {
            const int d = scn.doppler_bins[g / n_snr];
            out[g * n_test + i] = scorers[k](cells[g], d) > threshold[k] ? 1 : 0;
          }
        }
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        if (error[k].empty()) error[k] = e.what();
      }
    }
  });

  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < n_det; ++k) {
    const std::string name = to_string(detectors[k].tag);
    if (!error[k].empty()) report.failures.push_back({name, error[k]});
    for (std::size_t b = 0; b < n_bins; ++b) {
      for (std::size_t s = 0; s < n_snr; ++s) {
        const std::size_t g = b * n_snr + s;
        ReportRow row{name, family, scn.doppler_bins[b], scn.snr_grid_db[s], nan, nan, nan, n_test, threshold[k], pfa[k]};
        if (error[k].empty()) {
          std::size_t hits = 0;
          const unsigned char* e = &exceed[(k * n_grid + g) * n_test];
          for (std::size_t i = 0; i < n_test; ++i) hits += e[i];
          const PdEstimate est = wilson_interval(hits, n_test);
          row.pd = est.pd;
          row.ci_low = est.ci_low;
          row.ci_high = est.ci_high;
        }
        report.rows.push_back(row);
      }
    }
  }
  return report;
}

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

constexpr const char* kReportHeader =
    "detector,clutter_family,doppler_bin,snr_db,pd,ci_low,ci_high,n_trials,threshold,empirical_pfa";

}  // namespace

std::string report_csv(const DetectionReport& report) {
  std::ostringstream os;
  os << kReportHeader << '\n';
  for (const auto& r : report.rows) {
    os << r.detector << ',' << r.clutter_family << ',' << r.doppler_bin << ',' << format_double(r.snr_db) << ','
       << format_double(r.pd) << ',' << format_double(r.ci_low) << ',' << format_double(r.ci_high) << ','
       << r.n_trials << ',' << format_double(r.threshold) << ',' << format_double(r.empirical_pfa) << '\n';
  }
  return os.str();
}

void write_report_csv(const std::filesystem::path& path, const DetectionReport& report) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
  os << report_csv(report);
  if (!os) fail(ErrorKind::io, "write failed for " + path.string());
}

DetectionReport read_report_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorKind::io, "cannot open report " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != kReportHeader) {
    fail(ErrorKind::io, path.string() + ": unexpected report header");
  }
  DetectionReport report;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 10) fail(ErrorKind::io, path.string() + ":" + std::to_string(line_no) + ": expected 10 columns");
    try {
      report.rows.push_back({f[0], f[1], std::stoi(f[2]), std::stod(f[3]), std::stod(f[4]), std::stod(f[5]),
                             std::stod(f[6]), static_cast<std::size_t>(std::stoull(f[7])), std::stod(f[8]),
                             std::stod(f[9])});
    } catch (const std::logic_error&) {
      fail(ErrorKind::io, path.string() + ":" + std::to_string(line_no) + ": malformed number");
    }
  }
  return report;
}

double mean_pd_over_bins(const DetectionReport& report, const std::string& detector, double snr_db) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& r : report.rows) {
    if (r.detector == detector && std::abs(r.snr_db - snr_db) < 1e-9) {
      sum += r.pd;
      ++count;
    }
  }
  return count == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(count);
}

double pd_at(const DetectionReport& report, const std::string& detector, int doppler, double snr_db) {
  for (const auto& r : report.rows) {
    if (r.detector == detector && r.doppler_bin == doppler && std::abs(r.snr_db - snr_db) < 1e-9) return r.pd;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace radet
