#include "radet/workflow.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "radet/dataset_io.hpp"
#include "radet/error.hpp"
#include "radet/plot.hpp"

namespace radet {

namespace fs = std::filesystem;
using nlohmann::json;

FamilyPaths family_paths(const fs::path& out, ClutterFamily family) {
  const std::string name = to_string(family);
  const fs::path dir = out / name;
  return {dir,
          dir / "train.bin",
          dir / "cal.bin",
          dir / "verify.bin",
          dir / "test.bin",
          dir / "svdd.model",
          dir / "dsvdd.model",
          dir / "dsvdd_epochs.csv",
          out / ("report_" + name + ".csv")};
}

fs::path manifest_path(const fs::path& out) { return out / "manifest.json"; }

std::string fnv1a64_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::io, "cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (is) {
    is.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < is.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

json load_manifest(const fs::path& out) {
  std::ifstream is(manifest_path(out));
  if (!is) return json::object();
  try {
    return json::parse(is);
  } catch (const json::exception&) {
    fail(ErrorKind::validation, manifest_path(out).string() + ": corrupt manifest");
  }
}

json file_entry(const fs::path& out, const fs::path& file) {
  return {{"path", fs::relative(file, out).generic_string()}, {"fnv1a64", fnv1a64_file(file)}};
}

// Records the config and one stage's artifacts. Everything written is a
// function of the inputs, so reruns reproduce the manifest byte for byte.
void update_manifest(const fs::path& out, const RunConfig& config, ClutterFamily family, const std::string& stage,
                     const json& entries) {
  json m = load_manifest(out);
  m["format"] = "radet-run";
  m["version"] = 1;
  m["config_text"] = config.to_text();
  json resolved = json::object();
  std::istringstream lines(config.to_text());
  for (std::string line; std::getline(lines, line);) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) resolved[line.substr(0, eq)] = line.substr(eq + 3);
  }
  m["config"] = resolved;
  m["families"][to_string(family)][stage] = entries;
  const fs::path tmp = manifest_path(out).string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) fail(ErrorKind::io, "cannot write " + tmp.string());
    os << m.dump(2) << '\n';
  }
  fs::rename(tmp, manifest_path(out));
}

Dataset read_split(const fs::path& path, const Scenario& scn, SplitTag tag, std::size_t expected_count,
                   const char* producer) {
  if (!fs::exists(path)) {
    fail(ErrorKind::validation, "missing " + to_string(tag) + " split: expected " + path.string() + " (run `radet " +
                                    producer + "` with the same --config/--out first)");
  }
  Dataset ds = read_dataset(path);
  const auto& h = ds.header;
  auto mismatch = [&](const std::string& what) {
    fail(ErrorKind::validation, path.string() + ": " + what + " does not match the config; rerun `radet simulate`");
  };
  if (h.m != scn.m) mismatch("m");
  if (h.family != scn.family) mismatch("clutter family");
  if (h.master_seed != scn.master_seed) mismatch("seed");
  if (h.split != tag) mismatch("split tag");
  if (h.count != expected_count) mismatch("sample count");
  if (tag != SplitTag::train && h.k != scn.k_secondary) mismatch("K");
  return ds;
}

std::vector<ComplexVector> cells_of(const std::vector<Sample>& samples) {
  std::vector<ComplexVector> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.cell);
  return out;
}

bool wants(const RunConfig& config, DetectorTag tag) {
  return std::find(config.detectors.begin(), config.detectors.end(), tag) != config.detectors.end();
}

}  // namespace

void run_simulate(const RunConfig& config, const fs::path& out, std::ostream& log) {
  config.validate();
  fs::create_directories(out);
  for (ClutterFamily family : config.families) {
    const Scenario scn = config.scenario_for(family);
    const SceneGenerator gen(scn);
    const FamilyPaths paths = family_paths(out, family);
    fs::create_directories(paths.dir);
    json entries = json::object();
    const std::pair<SplitTag, fs::path> jobs[] = {{SplitTag::train, paths.train},
                                                  {SplitTag::calibration, paths.cal},
                                                  {SplitTag::verification, paths.verify},
                                                  {SplitTag::test, paths.test}};
    for (const auto& [tag, path] : jobs) {
      Stopwatch sw;
      const auto samples = make_split(gen, tag);
      DatasetHeader h;
      h.m = static_cast<std::uint32_t>(scn.m);
      h.k = tag == SplitTag::train ? 0 : static_cast<std::uint32_t>(scn.k_secondary);
      h.family = family;
      h.master_seed = scn.master_seed;
      h.split = tag;
      h.count = samples.size();
      write_dataset(path, h, samples);
      entries[to_string(tag)] = file_entry(out, path);
      entries[to_string(tag)]["count"] = samples.size();
      log << "[simulate] " << to_string(family) << " " << to_string(tag) << ": " << samples.size() << " samples -> "
          << path.string() << " (" << sw.seconds() << " s)\n";
    }
    update_manifest(out, config, family, "datasets", entries);
  }
}

void run_fit(const RunConfig& config, const fs::path& out, std::ostream& log) {
  config.validate();
  for (ClutterFamily family : config.families) {
    const Scenario scn = config.scenario_for(family);
    const FamilyPaths paths = family_paths(out, family);
    const auto train = cells_of(read_split(paths.train, scn, SplitTag::train, scn.n_train, "simulate").samples);
    json entries = json::object();
    if (wants(config, DetectorTag::svdd)) {
      Stopwatch sw;
      const SvddFit fit = fit_svdd(train, config.svdd_nu, config.svdd_solver);
      save_svdd(paths.svdd_model, fit.model);
      entries["svdd"] = file_entry(out, paths.svdd_model);
      log << "[fit] " << to_string(family) << " svdd: " << fit.model.support_points.size() << " support vectors, "
          << fit.solution.pair_updates << " pair updates, max KKT violation " << fit.solution.max_violation << " ("
          << sw.seconds() << " s)\n";
    }
    if (wants(config, DetectorTag::dsvdd)) {
      Stopwatch sw;
      const DsvddModel model = train_dsvdd(config.network, train, config.train);
      save_dsvdd(paths.dsvdd_model, model);
      write_epoch_log(paths.epoch_log, model.log);
      entries["dsvdd"] = file_entry(out, paths.dsvdd_model);
      entries["dsvdd_epochs"] = file_entry(out, paths.epoch_log);
      log << "[fit] " << to_string(family) << " dsvdd: " << model.log.size() << " epochs, final mean loss "
          << (model.log.empty() ? 0.0 : model.log.back().mean_loss) << " (" << sw.seconds() << " s)\n";
    }
    update_manifest(out, config, family, "models", entries);
  }
}

bool EvaluateResult::any_failure() const {
  for (const auto& [family, report] : reports) {
    if (!report.failures.empty()) return true;
  }
  return false;
}

bool EvaluateResult::total_failure() const {
  for (const auto& [family, report] : reports) {
    std::size_t detectors = 0;
    for (const auto& row : report.rows) {
      if (row.doppler_bin == report.rows.front().doppler_bin && row.snr_db == report.rows.front().snr_db) ++detectors;
    }
    if (report.failures.size() < detectors) return false;
  }
  return !reports.empty();
}

EvaluateResult run_evaluate(const RunConfig& config, const fs::path& out, std::ostream& log) {
  config.validate();
  EvaluateResult result;
  for (ClutterFamily family : config.families) {
    const Scenario scn = config.scenario_for(family);
    const FamilyPaths paths = family_paths(out, family);
    std::vector<DetectorHandle> detectors;
    for (DetectorTag tag : config.detectors) {
      if (tag == DetectorTag::svdd) {
        if (!fs::exists(paths.svdd_model)) {
          fail(ErrorKind::validation, "missing SVDD model " + paths.svdd_model.string() + " (run `radet fit` first)");
        }
        detectors.push_back(make_svdd_detector(std::make_shared<const SvddModel>(load_svdd(paths.svdd_model))));
      } else if (tag == DetectorTag::dsvdd) {
        if (!fs::exists(paths.dsvdd_model)) {
          fail(ErrorKind::validation, "missing Deep SVDD model " + paths.dsvdd_model.string() + " (run `radet fit` first)");
        }
        detectors.push_back(make_dsvdd_detector(std::make_shared<const DsvddModel>(load_dsvdd(paths.dsvdd_model))));
      } else {
        detectors.push_back(make_classical_detector(tag, scn, config.tyler));
      }
    }
    const auto cal = read_split(paths.cal, scn, SplitTag::calibration, scn.n_cal, "simulate").samples;
    const auto verify = read_split(paths.verify, scn, SplitTag::verification, scn.n_verify, "simulate").samples;
    const auto test = read_split(paths.test, scn, SplitTag::test, scn.n_test, "simulate").samples;

    Stopwatch sw;
    DetectionReport report = run_experiment(SceneGenerator(scn), detectors, cal, verify, test);
    write_report_csv(paths.report, report);
    json entries = json::object();
    entries["report"] = file_entry(out, paths.report);
    update_manifest(out, config, family, "evaluation", entries);
    if (config.plots) write_report_plots(out / "plots", to_string(family), report);
    log << "[evaluate] " << to_string(family) << ": " << report.rows.size() << " rows -> " << paths.report.string()
        << " (" << sw.seconds() << " s)\n";
    for (const auto& f : report.failures) {
      log << "[evaluate] " << to_string(family) << " detector " << f.detector << " FAILED: " << f.message << '\n';
    }
    result.reports.emplace_back(family, std::move(report));
  }
  return result;
}

}  // namespace radet
