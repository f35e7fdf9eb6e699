#include <filesystem>
#include <fstream>
#include <string>

#include "radet/config.hpp"
#include "test_support.hpp"

using namespace radet;

namespace {

std::string validation_message(const std::string& text) {
  try {
    (void)parse_config(text, "run.cfg");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::validation);
    return e.what();
  }
  FAIL("expected a validation error for: " << text);
  return {};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("defaults reproduce the reference protocol") {
  const RunConfig c = parse_config("");
  CHECK(c.families.size() == 2);
  CHECK(c.scenario.m == 16);
  CHECK(c.scenario.rho == 0.5);
  CHECK(c.scenario.pfa == 0.01);
  CHECK(c.scenario.n_train == 5000);
  CHECK(c.scenario.k_secondary == 32);
  CHECK(c.detectors.size() == 5);
  CHECK(c.svdd_nu == 0.01);
  CHECK(c.train.epochs == 15);
  CHECK(c.train.batch_size == 64);
  CHECK(c.train.learning_rate == 1e-3);
  CHECK(c.train.milestones == std::vector<std::size_t>{5, 10});
  CHECK(c.train.weight_decay == 1e-3);
  CHECK(c.network.channels == std::vector<std::size_t>{32, 64, 128});
  CHECK(c.plots);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("parsing values, comments and grids") {
  const RunConfig c = parse_config(
      "# protocol\n"
      "scenario.families = compound_gaussian\n"
      "scenario.m = 8   # shorter pulses\n"
      "scenario.snr_db = -4:4:2\n"
      "scenario.doppler_bins = 0, 3\n"
      "scenario.seed = 99\n"
      "scenario.texture_sharing = per_vector\n"
      "detectors = svdd, mf_true\n"
      "dsvdd.milestones = 2, 4\n"
      "dsvdd.epochs = 6\n"
      "output.plots = false\n");
  CHECK(c.families == std::vector<ClutterFamily>{ClutterFamily::compound_gaussian});
  CHECK(c.scenario.m == 8);
  CHECK(c.scenario.snr_grid_db == std::vector<double>{-4, -2, 0, 2, 4});
  CHECK(c.scenario.doppler_bins == std::vector<int>{0, 3});
  CHECK(c.scenario.master_seed == 99);
  CHECK(c.scenario.texture_sharing == TextureSharing::per_vector);
  CHECK(c.detectors == std::vector<DetectorTag>{DetectorTag::svdd, DetectorTag::mf_true});
  CHECK(c.train.milestones == std::vector<std::size_t>{2, 4});
  CHECK_FALSE(c.plots);
  const Scenario s = c.scenario_for(ClutterFamily::compound_gaussian);
  CHECK(s.family == ClutterFamily::compound_gaussian);
  CHECK(s.m == 8);
  CHECK(parse_config("scenario.doppler_bins = all\nscenario.m = 8\n").scenario_for(ClutterFamily::gaussian).doppler_bins.size() == 8);
}

TEST_CASE("diagnostics name the file, line and key") {
  const std::string pfa = validation_message("scenario.m = 16\nscenario.pfa = 0\n");
  CHECK(contains(pfa, "run.cfg:2:"));
  CHECK(contains(pfa, "scenario.pfa"));
  CHECK(contains(validation_message("scenario.mm = 3\n"), "run.cfg:1:"));
  CHECK(contains(validation_message("scenario.mm = 3\n"), "unknown"));
  CHECK(contains(validation_message("scenario.m = 8\n\nscenario.m = 9\n"), "run.cfg:3:"));
  CHECK(contains(validation_message("scenario.m = 16x\n"), "scenario.m"));
  CHECK(contains(validation_message("scenario.m 16\n"), "run.cfg:1:"));
  CHECK(contains(validation_message("detectors = mf_true, glrt\n"), "detectors"));
  CHECK(contains(validation_message("scenario.snr_db = 0:10:0\n"), "scenario.snr_db"));
  CHECK(contains(validation_message("output.plots = maybe\n"), "output.plots"));
}

TEST_CASE("semantic validation") {
  CHECK_ERROR_KIND(parse_config("detectors = svdd, svdd\n"), ErrorKind::validation);
  CHECK_ERROR_KIND(parse_config("svdd.nu = 0\n"), ErrorKind::validation);
  CHECK_ERROR_KIND(parse_config("svdd.nu = 0.01\nscenario.n_train = 50\n"), ErrorKind::validation);
  CHECK_ERROR_KIND(parse_config("scenario.n_cal = 50\n"), ErrorKind::validation);
  CHECK_ERROR_KIND(parse_config("scenario.m = 4\n"), ErrorKind::validation);  // three pooling stages need m >= 8
  CHECK_ERROR_KIND(parse_config("dsvdd.milestones = 20\n"), ErrorKind::validation);
  CHECK_ERROR_KIND(parse_config("scenario.doppler_bins = 16\n"), ErrorKind::validation);
}

TEST_CASE("canonical text round trips") {
  const RunConfig c = parse_config(
      "scenario.rho = 0.3\nscenario.snr_db = 0.5, 1.25\nscenario.noise_power = 0.1\n"
      "dsvdd.learning_rate = 3e-4\ntyler.tol = 1e-9\nsvdd.tol = 1e-7\n");
  const std::string text = c.to_text();
  const RunConfig back = parse_config(text);
  CHECK(back.to_text() == text);
  CHECK(back.scenario.rho == 0.3);
  CHECK(back.scenario.noise_power == 0.1);
  CHECK(back.scenario.snr_grid_db == std::vector<double>{0.5, 1.25});
  CHECK(back.train.learning_rate == 3e-4);
  CHECK(back.tyler.tol == 1e-9);
  CHECK(back.svdd_solver.tol == 1e-7);
  CHECK(parse_config("").to_text() == RunConfig{}.to_text());
}

TEST_CASE("loading files and manifests") {
  const auto dir = std::filesystem::temp_directory_path();
  const auto cfg = dir / "radet_test.cfg";
  std::ofstream(cfg) << "scenario.m = 8\nscenario.seed = 5\n";
  const RunConfig c = load_config(cfg);
  CHECK(c.scenario.m == 8);

  const auto manifest = dir / "radet_test_manifest.json";
  std::ofstream(manifest) << "{\"format\": \"radet-run\", \"version\": 1, \"config_text\": \"scenario.m = 8\\nscenario.seed = 6\\n\"}";
  CHECK(load_config(manifest).scenario.master_seed == 6);
  CHECK_ERROR_KIND(load_config(dir / "radet_no_such.cfg"), ErrorKind::io);
  std::filesystem::remove(cfg);
  std::filesystem::remove(manifest);
}
