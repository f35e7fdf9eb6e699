#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "radet/cfar.hpp"
#include "radet/classical.hpp"
#include "radet/dsvdd.hpp"
#include "radet/scene.hpp"
#include "radet/svdd.hpp"

namespace radet {

/// Everything a simulate/fit/evaluate run needs. Defaults reproduce the
/// reference protocol: m = 16, rho = 0.5, mu = 1, pfa = 0.01, N = 5000,
/// K = 32, nu = 0.01 and the 15-epoch Adam schedule.
struct RunConfig {
  std::vector<ClutterFamily> families{ClutterFamily::gaussian, ClutterFamily::compound_gaussian};
  /// The family field is overridden per run; empty doppler_bins means every
  /// bin 0..m-1.
  Scenario scenario = [] {
    Scenario s = Scenario::paper_defaults();
    s.doppler_bins.clear();
    return s;
  }();
  std::vector<DetectorTag> detectors{DetectorTag::mf_true, DetectorTag::amf_scm, DetectorTag::anmf_tyler,
                                     DetectorTag::svdd, DetectorTag::dsvdd};
  double svdd_nu = 0.01;
  DualSolverOptions svdd_solver;
  NetworkSpec network;
  TrainConfig train;
  TylerOptions tyler;
  bool plots = true;

  Scenario scenario_for(ClutterFamily family) const;
  void validate() const;
  /// Canonical `key = value` text of every setting, in schema order.
  std::string to_text() const;
};

/// Parses the flat key/value format:
///
///   # comment
///   scenario.m = 16
///   scenario.snr_db = 0:20:1        # start:stop:step, or a comma list
///   detectors = mf_true, amf_scm
///
/// Unknown keys, duplicates and malformed values raise Error(validation)
/// whose message starts with "<source>:<line>:".
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");

/// Reads a config file. A JSON run manifest is accepted too, in which case
/// the embedded resolved config is used.
RunConfig load_config(const std::filesystem::path& path);

}  // namespace radet
