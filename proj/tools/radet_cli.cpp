// radet: simulate scenes, fit the learned detectors, evaluate Pd at fixed
// Pfa, or run the oracle suite.
//
// Exit codes: 0 success, 1 invalid input or configuration, 2 runtime failure.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "radet/config.hpp"
#include "radet/error.hpp"
#include "radet/verify.hpp"
#include "radet/workflow.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct CommonOptions {
  std::string config;
  std::string out = "radet_out";
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& opt, bool config_required) {
  auto* c = cmd->add_option("--config", opt.config, "run config (key = value) or a run manifest.json");
  if (config_required) c->required();
  c->check(CLI::ExistingFile);
  cmd->add_option("--out", opt.out, "output directory")->capture_default_str();
  cmd->add_option("--seed", opt.seed, "override scenario.seed");
}

radet::RunConfig resolve(const CommonOptions& opt) {
  radet::RunConfig cfg = opt.config.empty() ? radet::RunConfig{} : radet::load_config(opt.config);
  if (opt.seed) cfg.scenario.master_seed = *opt.seed;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radar target detection in Gaussian and compound-Gaussian clutter"};
  app.require_subcommand(1);

  CommonOptions sim_opt, fit_opt, eval_opt, ver_opt;
  auto* sim = app.add_subcommand("simulate", "generate train/cal/verify/test splits");
  add_common(sim, sim_opt, true);
  auto* fit = app.add_subcommand("fit", "fit SVDD and Deep SVDD on the train split");
  add_common(fit, fit_opt, true);
  auto* eval = app.add_subcommand("evaluate", "calibrate thresholds and write Pd reports");
  add_common(eval, eval_opt, true);
  auto* ver = app.add_subcommand("verify", "run the analytic and brute-force oracle suite");
  add_common(ver, ver_opt, false);
  std::vector<std::string> faults;
  std::size_t samples = 100000;
  ver->add_option("--inject-fault", faults, "corrupt a component on purpose (tyler)");
  ver->add_option("--samples", samples, "Monte Carlo draws for the null checks")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*sim) {
      radet::run_simulate(resolve(sim_opt), sim_opt.out, std::cerr);
    } else if (*fit) {
      radet::run_fit(resolve(fit_opt), fit_opt.out, std::cerr);
    } else if (*eval) {
      const auto result = radet::run_evaluate(resolve(eval_opt), eval_opt.out, std::cerr);
      if (result.total_failure()) {
        std::cerr << "radet: every detector failed\n";
        return kExitRuntime;
      }
      if (result.any_failure()) std::cerr << "radet: some detectors failed; their report rows carry NaN\n";
    } else if (*ver) {
      radet::VerifyOptions vo;
      const radet::RunConfig cfg = resolve(ver_opt);
      vo.scenario = cfg.scenario_for(radet::ClutterFamily::compound_gaussian);
      vo.seed = cfg.scenario.master_seed;
      vo.monte_carlo = samples;
      vo.faults.insert(faults.begin(), faults.end());
      const auto checks = radet::run_oracle_suite(vo);
      std::cout << radet::format_checks(checks);
      for (const auto& c : checks) {
        if (!c.passed) return kExitRuntime;
      }
    }
  } catch (const radet::Error& e) {
    std::cerr << "radet: " << e.what() << '\n';
    const bool input_error = e.kind() == radet::ErrorKind::validation || e.kind() == radet::ErrorKind::invalid_parameter ||
                             e.kind() == radet::ErrorKind::invalid_data || e.kind() == radet::ErrorKind::io;
    return input_error ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "radet: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
