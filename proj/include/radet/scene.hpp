#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "radet/linalg.hpp"
#include "radet/random.hpp"

namespace radet {

enum class ClutterFamily { gaussian, compound_gaussian };

/// How the compound-Gaussian texture is shared inside one sample.
enum class TextureSharing { per_sample, per_vector };

std::string to_string(ClutterFamily family);
ClutterFamily parse_clutter_family(const std::string& text);
std::string to_string(TextureSharing sharing);
TextureSharing parse_texture_sharing(const std::string& text);

struct Scenario {
  ClutterFamily family = ClutterFamily::gaussian;
  std::size_t m = 16;
  std::size_t k_secondary = 32;
  double rho = 0.5;
  double texture_shape = 1.0;
  double noise_power = 1.0;
  TextureSharing texture_sharing = TextureSharing::per_sample;
  double pfa = 0.01;
  std::vector<double> snr_grid_db;
  std::vector<int> doppler_bins;
  std::size_t n_train = 5000;
  std::size_t n_cal = 5000;
  std::size_t n_verify = 5000;
  std::size_t n_test = 5000;
  std::uint64_t master_seed = 20251016;

  /// Defaults with SNR 0..20 dB in 1 dB steps and every Doppler bin.
  static Scenario paper_defaults(ClutterFamily family = ClutterFamily::gaussian);

  /// Throws Error(validation) naming the offending field.
  void validate() const;

  /// T(rho): the speckle covariance, unit diagonal so trace = m.
  HermitianMatrix clutter_covariance() const;
  /// E[z z^H] under H0: E[tau] T(rho) + noise_power I, with E[tau] = 1.
  HermitianMatrix total_covariance() const;
};

enum class Label { h0, h1 };

struct TargetParams {
  double snr_db;
  int doppler;
  double phase;
};

struct Sample {
  ComplexVector cell;
  std::vector<ComplexVector> secondary;  // K target-free columns
  Label label = Label::h0;
  std::optional<TargetParams> target;
  double texture = 1.0;  // texture applied to the cell clutter
};

/// p_k = exp(j 2 pi d k / m), k = 0..m-1.
ComplexVector steering_vector(int d, std::size_t m);

/// count draws of CN(0, A) where chol = cholesky(A).
std::vector<ComplexVector> draw_complex_gaussian(const CholeskyFactor& chol, std::size_t count,
                                                 RandomStream& stream);
std::vector<ComplexVector> draw_complex_gaussian(const HermitianMatrix& sigma, std::size_t count,
                                                 RandomStream& stream);

/// Gamma(shape = mu, scale = 1/mu): mean 1, variance 1/mu.
double draw_texture(double mu, RandomStream& stream);

/// alpha = sqrt(10^{snr_db/10} / m) e^{j phase}
cdouble target_amplitude(double snr_db, std::size_t m, double phase);

/// Split tags used to derive the counter-based substreams.
enum class SplitTag : std::uint64_t {
  train = 1,
  calibration = 2,
  verification = 3,
  test = 4,
  test_phase = 5,
  adhoc = 6,
};

std::string to_string(SplitTag tag);

/// Generates samples for one Scenario. Holds the clutter Cholesky factor so
/// per-sample generation is cheap; immutable after construction and safe to
/// share across threads.
class SceneGenerator {
 public:
  explicit SceneGenerator(Scenario scn);

  const Scenario& scenario() const noexcept { return scn_; }

  /// Stream for sample `index` of a split.
  RandomStream stream(SplitTag tag, std::uint64_t index) const;

  /// Target-free sample: cell = sqrt(tau) c + n plus `secondary_count`
  /// columns drawn the same way. `forced_texture` overrides the drawn tau
  /// while still consuming the draw, so replays stay aligned.
  Sample interference(RandomStream& stream, std::size_t secondary_count,
                      std::optional<double> forced_texture = std::nullopt) const;

  /// Adds alpha p(d) to the cell, drawing the phase from `stream`.
  void inject_target(Sample& sample, double snr_db, int d, RandomStream& stream) const;

  /// One full sample from a single stream: interference first, then the phase.
  Sample synthesize(bool with_target, std::optional<double> snr_db, std::optional<int> d,
                    RandomStream& stream, std::size_t secondary_count) const;

  /// Target-present test cell for grid point (snr_db, d) built on test
  /// interference record `index`. The phase comes from its own substream.
  Sample test_sample(const Sample& interference_record, std::uint64_t index, double snr_db,
                     int d) const;
  /// Only the cell of test_sample(); skips copying the secondary block.
  ComplexVector test_cell(const ComplexVector& interference_cell, std::uint64_t index, double snr_db,
                          int d, TargetParams* params = nullptr) const;

 private:
  Scenario scn_;
  CholeskyFactor clutter_chol_;
  std::uint64_t key_;
};

/// Free-function form of SceneGenerator::synthesize.
Sample synthesize_sample(const Scenario& scn, bool with_target, std::optional<double> snr_db,
                         std::optional<int> d, RandomStream& stream);

struct Splits {
  std::vector<Sample> train_h0;      // cells only
  std::vector<Sample> cal_h0;        // cell + K secondary
  std::vector<Sample> verify_h0;     // cell + K secondary, disjoint from cal
  std::vector<Sample> test_interference;  // cell + K secondary; targets injected per grid point
};

/// Generates the split named by `tag` (train, calibration, verification or test).
std::vector<Sample> make_split(const SceneGenerator& gen, SplitTag tag);
Splits make_splits(const Scenario& scn);

}  // namespace radet
