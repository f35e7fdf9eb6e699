#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "radet/autodiff.hpp"
#include "radet/linalg.hpp"

namespace radet {

/// Bias-free 1D convolutional encoder: per stage conv -> scale-only batch
/// norm -> leaky ReLU -> max pool, then adaptive average pooling to length 1
/// and a bias-free fully connected projection.
struct NetworkSpec {
  std::size_t in_channels = 2;
  std::vector<std::size_t> channels{32, 64, 128};
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::size_t padding = 1;
  std::size_t pool = 2;
  double leaky_slope = 0.01;
  std::size_t rep_dim = 128;
  double bn_eps = 1e-5;
  double bn_momentum = 0.1;

  /// Throws if an input of length m cannot pass every pooling stage.
  void check_input_length(std::size_t m) const;
};

class Network {
 public:
  /// Uniform(-sqrt(6/fan_in), +sqrt(6/fan_in)) weights, unit batch-norm
  /// scales, running statistics (0, 1).
  static Network initialize(const NetworkSpec& spec, std::uint64_t seed);

  const NetworkSpec& spec() const noexcept { return spec_; }

  /// batch (B, in_channels, m) -> (B, rep_dim). Training mode uses batch
  /// statistics and updates the running ones.
  ad::Tensor forward(const ad::Tensor& batch, bool training);
  /// Evaluation-mode forward; rows are computed independently.
  ad::Tensor infer(const ad::Tensor& batch) const;

  /// Every trainable tensor: conv weights, batch-norm scales, fc weight.
  std::vector<ad::Tensor> parameters() const;

  std::vector<ad::Tensor>& conv_weights() noexcept { return conv_; }
  std::vector<ad::Tensor>& bn_scales() noexcept { return bn_scale_; }
  std::vector<ad::BatchNormState>& bn_states() noexcept { return bn_state_; }
  const std::vector<ad::BatchNormState>& bn_states() const noexcept { return bn_state_; }
  ad::Tensor& fc_weight() noexcept { return fc_; }
  const std::vector<ad::Tensor>& conv_weights() const noexcept { return conv_; }
  const std::vector<ad::Tensor>& bn_scales() const noexcept { return bn_scale_; }
  const ad::Tensor& fc_weight() const noexcept { return fc_; }

  /// Independent copy (tensors are reference-semantic handles).
  Network clone() const;

 private:
  NetworkSpec spec_;
  std::vector<ad::Tensor> conv_;
  std::vector<ad::Tensor> bn_scale_;
  std::vector<ad::BatchNormState> bn_state_;
  ad::Tensor fc_;
};

/// Per-channel (real, imaginary) standardization.
struct Standardization {
  std::array<double, 2> mean{0.0, 0.0};
  std::array<double, 2> std{1.0, 1.0};
};

Standardization fit_standardization(const std::vector<ComplexVector>& train);

/// (2, m) layout: row 0 real parts, row 1 imaginary parts, then standardized
/// with `stats` when given.
std::vector<double> embed_complex(const ComplexVector& z, const Standardization* stats = nullptr);
/// Stacks the selected cells into a (count, 2, m) tensor.
ad::Tensor embed_batch(const std::vector<ComplexVector>& cells, std::span<const std::size_t> indices,
                       const Standardization& stats);

/// Mean evaluation-mode output over the set; coordinates with |c_j| < 0.1
/// pushed to +-0.1 keeping the sign (zero goes to +0.1).
std::vector<double> init_center(const Network& net, const std::vector<ComplexVector>& train,
                                const Standardization& stats);
void clamp_center(std::vector<double>& center, double eps = 0.1);

/// (1/n) sum ||psi(z_i) - c||^2 + (beta / 2) sum_l ||W_l||_F^2
ad::Tensor dsvdd_loss(Network& net, const ad::Tensor& batch, std::span<const double> center,
                      double beta, bool training = true);

struct TrainConfig {
  std::size_t epochs = 15;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  std::vector<std::size_t> milestones{5, 10};
  double gamma = 0.1;
  double weight_decay = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 7;

  void validate() const;
  /// Learning rate in effect during zero-based `epoch`.
  double lr_at(std::size_t epoch) const;
};

struct EpochLog {
  std::size_t epoch;  // 1-based
  double mean_loss;
  double lr;
};

struct DsvddModel {
  Network net;
  std::vector<double> center;
  Standardization standardization;
  std::vector<EpochLog> log;
};

/// Standardization, seeded initialization, center, then Adam epochs with a
/// milestone schedule and a seeded per-epoch shuffle. Throws TrainingError
/// on a non-finite loss.
DsvddModel train_dsvdd(const NetworkSpec& spec, const std::vector<ComplexVector>& train,
                       const TrainConfig& config);

/// ||psi(z) - c||^2 in evaluation mode.
double dsvdd_score(const ComplexVector& z, const DsvddModel& model);
/// Batched scoring; identical to scoring each cell alone.
std::vector<double> dsvdd_scores(const std::vector<ComplexVector>& cells, const DsvddModel& model,
                                 std::size_t chunk = 256);

/// Binary model file, little-endian:
///   magic "RADETDN1", u32 version (1),
///   u64 in_channels, u64 stage count S, S x u64 channels, u64 kernel,
///   u64 stride, u64 padding, u64 pool, f64 leaky_slope, u64 rep_dim,
///   f64 bn_eps, f64 bn_momentum,
///   f64 mean[2], f64 std[2], rep_dim x f64 center,
///   then per stage: conv weight (Cout*Cin*kernel f64), bn scale (C f64),
///   running mean (C f64), running var (C f64); finally the fc weight
///   (rep_dim * C_last f64). Tensors are row-major.
void save_dsvdd(const std::filesystem::path& path, const DsvddModel& model);
DsvddModel load_dsvdd(const std::filesystem::path& path);

/// CSV with header `epoch,mean_loss,lr`.
void write_epoch_log(const std::filesystem::path& path, const std::vector<EpochLog>& log);

}  // namespace radet
