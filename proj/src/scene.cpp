#include "radet/scene.hpp"

#include <cmath>
#include <cstring>
#include <numbers>

#include "radet/error.hpp"
#include "radet/parallel.hpp"

namespace radet {

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  fail(ErrorKind::validation, "scenario." + field + ": " + why);
}

ComplexVector standard_complex_normal(std::size_t m, RandomStream& stream) {
  // real and imaginary parts ~ N(0, 1/2) so that E[w w^H] = I
  constexpr double kHalf = 0.70710678118654752440;
  ComplexVector w(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double re = stream.normal();
    const double im = stream.normal();
    w[i] = {kHalf * re, kHalf * im};
  }
  return w;
}

}  // namespace

std::string to_string(ClutterFamily family) {
  return family == ClutterFamily::gaussian ? "gaussian" : "compound_gaussian";
}

ClutterFamily parse_clutter_family(const std::string& text) {
  if (text == "gaussian") return ClutterFamily::gaussian;
  if (text == "compound_gaussian" || text == "compound") return ClutterFamily::compound_gaussian;
  fail(ErrorKind::validation, "unknown clutter family '" + text + "'");
}

std::string to_string(TextureSharing sharing) {
  return sharing == TextureSharing::per_sample ? "per_sample" : "per_vector";
}

TextureSharing parse_texture_sharing(const std::string& text) {
  if (text == "per_sample") return TextureSharing::per_sample;
  if (text == "per_vector") return TextureSharing::per_vector;
  fail(ErrorKind::validation, "unknown texture sharing '" + text + "'");
}

std::string to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::train: return "train";
    case SplitTag::calibration: return "cal";
    case SplitTag::verification: return "verify";
    case SplitTag::test: return "test";
    case SplitTag::test_phase: return "test_phase";
    case SplitTag::adhoc: return "adhoc";
  }
  return "unknown";
}

Scenario Scenario::paper_defaults(ClutterFamily family) {
  Scenario s;
  s.family = family;
  for (int db = 0; db <= 20; ++db) s.snr_grid_db.push_back(db);
  for (int d = 0; d < static_cast<int>(s.m); ++d) s.doppler_bins.push_back(d);
  return s;
}

void Scenario::validate() const {
  if (m < 2) invalid("m", "must be >= 2");
  if (k_secondary < 1) invalid("k_secondary", "must be >= 1");
  if (!(std::abs(rho) < 1.0)) invalid("rho", "|rho| must be < 1");
  if (!(texture_shape > 0.0) || !std::isfinite(texture_shape)) invalid("texture_shape", "must be > 0");
  if (!(noise_power >= 0.0) || !std::isfinite(noise_power)) invalid("noise_power", "must be >= 0");
  if (!(pfa > 0.0 && pfa < 1.0)) invalid("pfa", "must lie in (0, 1)");
  if (n_train < 1) invalid("n_train", "must be >= 1");
  if (n_cal < 1) invalid("n_cal", "must be >= 1");
  if (n_verify < 1) invalid("n_verify", "must be >= 1");
  if (n_test < 1) invalid("n_test", "must be >= 1");
  for (double s : snr_grid_db) {
    if (!std::isfinite(s)) invalid("snr_grid_db", "non-finite entry");
  }
  for (int d : doppler_bins) {
    if (d < 0 || d >= static_cast<int>(m)) {
      invalid("doppler_bins", "bin " + std::to_string(d) + " outside [0, m)");
    }
  }
}

HermitianMatrix Scenario::clutter_covariance() const { return toeplitz(rho, m); }

HermitianMatrix Scenario::total_covariance() const {
  HermitianMatrix s = clutter_covariance();
  s.add_diagonal(noise_power);
  return s;
}

ComplexVector steering_vector(int d, std::size_t m) {
  if (d < 0 || static_cast<std::size_t>(d) >= m) {
    fail(ErrorKind::invalid_parameter,
         "steering_vector: Doppler bin " + std::to_string(d) + " outside [0, " + std::to_string(m) + ")");
  }
  ComplexVector p(m);
  for (std::size_t k = 0; k < m; ++k) {
    // reduce d*k mod m first so the phase argument stays small and exact
    const auto r = static_cast<double>((static_cast<std::size_t>(d) * k) % m);
    const double theta = 2.0 * std::numbers::pi * r / static_cast<double>(m);
    p[k] = {std::cos(theta), std::sin(theta)};
  }
  return p;
}

std::vector<ComplexVector> draw_complex_gaussian(const CholeskyFactor& chol, std::size_t count,
                                                 RandomStream& stream) {
  std::vector<ComplexVector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(chol.color(standard_complex_normal(chol.dim(), stream)));
  }
  return out;
}

std::vector<ComplexVector> draw_complex_gaussian(const HermitianMatrix& sigma, std::size_t count,
                                                 RandomStream& stream) {
  return draw_complex_gaussian(cholesky(sigma), count, stream);
}

double draw_texture(double mu, RandomStream& stream) {
  if (!(mu > 0.0)) fail(ErrorKind::invalid_parameter, "draw_texture: shape must be > 0");
  double tau = 0.0;
  // gamma_distribution can underflow to exactly 0 for tiny shapes; redraw
  while (!(tau > 0.0)) tau = stream.gamma(mu, 1.0 / mu);
  return tau;
}

cdouble target_amplitude(double snr_db, std::size_t m, double phase) {
  const double snr_linear = std::pow(10.0, snr_db / 10.0);
  return std::polar(std::sqrt(snr_linear / static_cast<double>(m)), phase);
}

SceneGenerator::SceneGenerator(Scenario scn)
    : scn_((scn.validate(), std::move(scn))),
      clutter_chol_(scn_.clutter_covariance()),
      key_(mix64(scn_.master_seed)) {}

RandomStream SceneGenerator::stream(SplitTag tag, std::uint64_t index) const {
  return RandomStream(key_, stream_id(static_cast<std::uint64_t>(tag), index));
}

Sample SceneGenerator::interference(RandomStream& stream, std::size_t secondary_count,
                                    std::optional<double> forced_texture) const {
  const bool compound = scn_.family == ClutterFamily::compound_gaussian;
  const bool shared = scn_.texture_sharing == TextureSharing::per_sample;
  const double noise_scale = std::sqrt(scn_.noise_power);
  const std::size_t m = scn_.m;

  auto next_texture = [&]() {
    if (!compound) return 1.0;
    const double drawn = draw_texture(scn_.texture_shape, stream);
    return forced_texture ? *forced_texture : drawn;
  };

  auto one_vector = [&](double tau) {
    ComplexVector v = clutter_chol_.color(standard_complex_normal(m, stream));
    v *= std::sqrt(tau);
    ComplexVector n = standard_complex_normal(m, stream);
    n *= noise_scale;
    v += n;
    return v;
  };

  const double sample_tau = next_texture();
  Sample s{one_vector(sample_tau), {}, Label::h0, std::nullopt, sample_tau};
  s.secondary.reserve(secondary_count);
  for (std::size_t k = 0; k < secondary_count; ++k) {
    const double tau = shared ? sample_tau : next_texture();
    s.secondary.push_back(one_vector(tau));
  }
  return s;
}

void SceneGenerator::inject_target(Sample& sample, double snr_db, int d, RandomStream& stream) const {
  const double phase = 2.0 * std::numbers::pi * stream.uniform();  // uniform() is in (0, 1)
  const cdouble alpha = target_amplitude(snr_db, scn_.m, phase);
  ComplexVector p = steering_vector(d, scn_.m);
  p *= alpha;
  sample.cell += p;
  sample.label = Label::h1;
  sample.target = TargetParams{snr_db, d, phase};
}

Sample SceneGenerator::synthesize(bool with_target, std::optional<double> snr_db, std::optional<int> d,
                                  RandomStream& stream, std::size_t secondary_count) const {
  if (with_target && (!snr_db || !d)) {
    fail(ErrorKind::invalid_parameter, "synthesize: target requested without SNR and Doppler bin");
  }
  Sample s = interference(stream, secondary_count);
  if (with_target) inject_target(s, *snr_db, *d, stream);
  return s;
}

Sample SceneGenerator::test_sample(const Sample& interference_record, std::uint64_t index,
                                   double snr_db, int d) const {
  Sample s = interference_record;
  TargetParams params{};
  s.cell = test_cell(interference_record.cell, index, snr_db, d, &params);
  s.label = Label::h1;
  s.target = params;
  return s;
}

ComplexVector SceneGenerator::test_cell(const ComplexVector& interference_cell, std::uint64_t index,
                                        double snr_db, int d, TargetParams* params) const {
  std::uint64_t snr_bits = 0;
  static_assert(sizeof(snr_bits) == sizeof(snr_db));
  std::memcpy(&snr_bits, &snr_db, sizeof(snr_bits));
  RandomStream phase_stream(
      key_, stream_id(static_cast<std::uint64_t>(SplitTag::test_phase), index, snr_bits,
                      static_cast<std::uint64_t>(d)));
  Sample s{interference_cell, {}, Label::h0, std::nullopt, 1.0};
  inject_target(s, snr_db, d, phase_stream);
  if (params) *params = *s.target;
  return std::move(s.cell);
}

Sample synthesize_sample(const Scenario& scn, bool with_target, std::optional<double> snr_db,
                         std::optional<int> d, RandomStream& stream) {
  return SceneGenerator(scn).synthesize(with_target, snr_db, d, stream, scn.k_secondary);
}

std::vector<Sample> make_split(const SceneGenerator& gen, SplitTag tag) {
  const Scenario& scn = gen.scenario();
  std::size_t count = 0;
  std::size_t secondary = scn.k_secondary;
  switch (tag) {
    case SplitTag::train:
      count = scn.n_train;
      secondary = 0;
      break;
    case SplitTag::calibration: count = scn.n_cal; break;
    case SplitTag::verification: count = scn.n_verify; break;
    case SplitTag::test: count = scn.n_test; break;
    default: fail(ErrorKind::invalid_parameter, "make_split: not a dataset split: " + to_string(tag));
  }
  std::vector<std::optional<Sample>> slots(count);
  parallel_for(count, [&](std::size_t i) {
    RandomStream rs = gen.stream(tag, i);
    slots[i] = gen.interference(rs, secondary);
  });
  std::vector<Sample> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

Splits make_splits(const Scenario& scn) {
  const SceneGenerator gen(scn);
  return Splits{make_split(gen, SplitTag::train), make_split(gen, SplitTag::calibration),
                make_split(gen, SplitTag::verification), make_split(gen, SplitTag::test)};
}

}  // namespace radet
