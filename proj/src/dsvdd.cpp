#include "radet/dsvdd.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "radet/binary_io.hpp"
#include "radet/error.hpp"
#include "radet/random.hpp"

namespace radet {

namespace {

constexpr std::uint64_t kInitTag = 0x1417;
constexpr std::uint64_t kShuffleTag = 0x5417;

ad::Tensor uniform_tensor(ad::Shape shape, double bound, RandomStream& rs) {
  std::vector<double> v(ad::element_count(shape));
  for (auto& x : v) x = bound * (2.0 * rs.uniform() - 1.0);
  return ad::Tensor::from(std::move(shape), std::move(v), true);
}

std::size_t stage_output_length(const NetworkSpec& spec, std::size_t len) {
  if (len + 2 * spec.padding < spec.kernel) return 0;
  len = (len + 2 * spec.padding - spec.kernel) / spec.stride + 1;
  if (len < spec.pool) return 0;
  return (len - spec.pool) / spec.pool + 1;
}

}  // namespace

void NetworkSpec::check_input_length(std::size_t m) const {
  if (channels.empty() || in_channels == 0 || rep_dim == 0 || kernel == 0 || stride == 0 || pool == 0) {
    fail(ErrorKind::invalid_parameter, "NetworkSpec: zero-sized layer");
  }
  std::size_t len = m;
  for (std::size_t s = 0; s < channels.size(); ++s) {
    len = stage_output_length(*this, len);
    if (len == 0) {
      fail(ErrorKind::dimension_mismatch,
           "NetworkSpec: input length " + std::to_string(m) + " does not survive stage " + std::to_string(s + 1));
    }
  }
}

Network Network::initialize(const NetworkSpec& spec, std::uint64_t seed) {
  Network net;
  net.spec_ = spec;
  const std::uint64_t key = mix64(seed);
  std::uint64_t tensor_index = 0;
  std::size_t cin = spec.in_channels;
  for (std::size_t cout : spec.channels) {
    RandomStream rs(key, stream_id(kInitTag, tensor_index++));
    const double bound = std::sqrt(6.0 / static_cast<double>(cin * spec.kernel));
    net.conv_.push_back(uniform_tensor({cout, cin, spec.kernel}, bound, rs));
    net.bn_scale_.push_back(ad::Tensor::from({cout}, std::vector<double>(cout, 1.0), true));
    net.bn_state_.push_back(ad::BatchNormState{std::vector<double>(cout, 0.0), std::vector<double>(cout, 1.0),
                                               spec.bn_momentum, spec.bn_eps});
    cin = cout;
  }
  RandomStream rs(key, stream_id(kInitTag, tensor_index));
  net.fc_ = uniform_tensor({spec.rep_dim, cin}, std::sqrt(6.0 / static_cast<double>(cin)), rs);
  return net;
}

ad::Tensor Network::forward(const ad::Tensor& batch, bool training) {
  if (batch.shape().size() != 3 || batch.dim(1) != spec_.in_channels) {
    fail(ErrorKind::dimension_mismatch, "Network::forward: expected (B, in_channels, m)");
  }
  spec_.check_input_length(batch.dim(2));
  ad::Tensor h = batch;
  for (std::size_t s = 0; s < conv_.size(); ++s) {
    h = ad::conv1d(h, conv_[s], spec_.stride, spec_.padding);
    h = training ? ad::batch_norm(h, bn_scale_[s], bn_state_[s], true)
                 : ad::batch_norm_eval(h, bn_scale_[s], bn_state_[s]);
    h = ad::leaky_relu(h, spec_.leaky_slope);
    h = ad::max_pool1d(h, spec_.pool, spec_.pool);
  }
  h = ad::adaptive_avg_pool1d(h, 1);
  h = ad::reshape(h, {h.dim(0), h.dim(1)});
  return ad::linear(h, fc_);
}

ad::Tensor Network::infer(const ad::Tensor& batch) const {
  // evaluation mode never touches the running statistics
  return const_cast<Network*>(this)->forward(batch, false);
}

std::vector<ad::Tensor> Network::parameters() const {
  std::vector<ad::Tensor> p;
  for (std::size_t s = 0; s < conv_.size(); ++s) {
    p.push_back(conv_[s]);
    p.push_back(bn_scale_[s]);
  }
  p.push_back(fc_);
  return p;
}

Network Network::clone() const {
  Network copy = *this;
  auto deep = [](const ad::Tensor& t) {
    return ad::Tensor::from(t.shape(), std::vector<double>(t.value().begin(), t.value().end()), true);
  };
  for (auto& t : copy.conv_) t = deep(t);
  for (auto& t : copy.bn_scale_) t = deep(t);
  copy.fc_ = deep(copy.fc_);
  return copy;
}

Standardization fit_standardization(const std::vector<ComplexVector>& train) {
  if (train.empty()) fail(ErrorKind::invalid_parameter, "fit_standardization: empty training set");
  Standardization st;
  std::array<double, 2> sum{0.0, 0.0};
  std::array<double, 2> sq{0.0, 0.0};
  double n = 0.0;
  for (const auto& z : train) {
    for (const auto& x : z) {
      sum[0] += x.real();
      sum[1] += x.imag();
      n += 1.0;
    }
  }
  st.mean = {sum[0] / n, sum[1] / n};
  for (const auto& z : train) {
    for (const auto& x : z) {
      sq[0] += (x.real() - st.mean[0]) * (x.real() - st.mean[0]);
      sq[1] += (x.imag() - st.mean[1]) * (x.imag() - st.mean[1]);
    }
  }
  for (int c = 0; c < 2; ++c) {
    st.std[c] = std::sqrt(sq[c] / n);
    if (!(st.std[c] > 0.0)) {
      fail(ErrorKind::degenerate_data, "fit_standardization: channel " + std::to_string(c) + " has zero spread");
    }
  }
  return st;
}

std::vector<double> embed_complex(const ComplexVector& z, const Standardization* stats) {
  const std::size_t m = z.size();
  std::vector<double> out(2 * m);
  for (std::size_t i = 0; i < m; ++i) {
    out[i] = z[i].real();
    out[m + i] = z[i].imag();
  }
  if (stats) {
    for (std::size_t i = 0; i < m; ++i) {
      out[i] = (out[i] - stats->mean[0]) / stats->std[0];
      out[m + i] = (out[m + i] - stats->mean[1]) / stats->std[1];
    }
  }
  return out;
}

ad::Tensor embed_batch(const std::vector<ComplexVector>& cells, std::span<const std::size_t> indices,
                       const Standardization& stats) {
  if (indices.empty()) fail(ErrorKind::invalid_parameter, "embed_batch: empty batch");
  const std::size_t m = cells[indices[0]].size();
  std::vector<double> values;
  values.reserve(indices.size() * 2 * m);
  for (std::size_t idx : indices) {
    if (cells[idx].size() != m) fail(ErrorKind::dimension_mismatch, "embed_batch: ragged cells");
    const auto row = embed_complex(cells[idx], &stats);
    values.insert(values.end(), row.begin(), row.end());
  }
  return ad::Tensor::from({indices.size(), 2, m}, std::move(values));
}

void clamp_center(std::vector<double>& center, double eps) {
  for (auto& c : center) {
    if (std::abs(c) < eps) c = c < 0.0 ? -eps : eps;
  }
}

std::vector<double> init_center(const Network& net, const std::vector<ComplexVector>& train,
                                const Standardization& stats) {
  if (train.empty()) fail(ErrorKind::invalid_parameter, "init_center: empty training set");
  const std::size_t d = net.spec().rep_dim;
  std::vector<double> c(d, 0.0);
  constexpr std::size_t kChunk = 256;
  std::vector<std::size_t> idx;
  for (std::size_t first = 0; first < train.size(); first += kChunk) {
    const std::size_t count = std::min(kChunk, train.size() - first);
    idx.resize(count);
    std::iota(idx.begin(), idx.end(), first);
    const ad::Tensor out = net.infer(embed_batch(train, idx, stats));
    const auto v = out.value();
    for (std::size_t b = 0; b < count; ++b) {
      for (std::size_t j = 0; j < d; ++j) c[j] += v[b * d + j];
    }
  }
  for (auto& x : c) x /= static_cast<double>(train.size());
  clamp_center(c);
  return c;
}

ad::Tensor dsvdd_loss(Network& net, const ad::Tensor& batch, std::span<const double> center, double beta,
                      bool training) {
  ad::Tensor loss = ad::mean_squared_distance(net.forward(batch, training), center);
  if (beta == 0.0) return loss;
  ad::Tensor reg;
  for (const auto& w : net.parameters()) {
    ad::Tensor sq = ad::sum_of_squares(w);
    reg = reg.defined() ? ad::add(reg, sq) : sq;
  }
  return ad::add(loss, ad::scale(reg, beta / 2.0));
}

void TrainConfig::validate() const {
  if (epochs == 0 || batch_size == 0) fail(ErrorKind::validation, "train: epochs and batch_size must be positive");
  if (!(learning_rate > 0.0) || !(gamma > 0.0) || weight_decay < 0.0) {
    fail(ErrorKind::validation, "train: learning rate and gamma must be positive, weight decay non-negative");
  }
  for (auto ms : milestones) {
    if (ms == 0 || ms >= epochs) fail(ErrorKind::validation, "train: milestones must lie in (0, epochs)");
  }
}

double TrainConfig::lr_at(std::size_t epoch) const {
  double lr = learning_rate;
  for (auto ms : milestones) {
    if (epoch >= ms) lr *= gamma;
  }
  return lr;
}

namespace {

struct AdamSlot {
  std::vector<double> m;
  std::vector<double> v;
};

}  // namespace

DsvddModel train_dsvdd(const NetworkSpec& spec, const std::vector<ComplexVector>& train,
                       const TrainConfig& config) {
  config.validate();
  if (train.empty()) fail(ErrorKind::invalid_parameter, "train_dsvdd: empty training set");
  spec.check_input_length(train.front().size());

  DsvddModel model{Network::initialize(spec, config.seed), {}, fit_standardization(train), {}};
  model.center = init_center(model.net, train, model.standardization);

  std::vector<ad::Tensor> params = model.net.parameters();
  std::vector<AdamSlot> slots;
  for (const auto& p : params) slots.push_back({std::vector<double>(p.size(), 0.0), std::vector<double>(p.size(), 0.0)});

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  const std::uint64_t key = mix64(config.seed);
  std::uint64_t step = 0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    RandomStream rs(key, stream_id(kShuffleTag, epoch));
    for (std::size_t i = order.size(); i-- > 1;) {
      const auto j = static_cast<std::size_t>(rs.uniform() * static_cast<double>(i + 1));
      std::swap(order[i], order[std::min(j, i)]);
    }
    const double lr = config.lr_at(epoch);
    double loss_sum = 0.0;
    for (std::size_t first = 0; first < order.size(); first += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, order.size() - first);
      const std::span<const std::size_t> idx(order.data() + first, count);
      ad::Tensor loss = dsvdd_loss(model.net, embed_batch(train, idx, model.standardization), model.center,
                                   config.weight_decay, true);
      const double value = loss.item();
      if (!std::isfinite(value)) {
        throw TrainingError("train_dsvdd: non-finite loss in epoch " + std::to_string(epoch + 1),
                            static_cast<int>(epoch + 1));
      }
      loss_sum += value * static_cast<double>(count);

      for (auto& p : params) p.zero_grad();
      loss.backward();

      ++step;
      const double bc1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(step));
      for (std::size_t k = 0; k < params.size(); ++k) {
        auto w = params[k].value();
        const auto g = params[k].grad();
        auto& s = slots[k];
        for (std::size_t i = 0; i < w.size(); ++i) {
          s.m[i] = config.adam_beta1 * s.m[i] + (1.0 - config.adam_beta1) * g[i];
          s.v[i] = config.adam_beta2 * s.v[i] + (1.0 - config.adam_beta2) * g[i] * g[i];
          const double mhat = s.m[i] / bc1;
          const double vhat = s.v[i] / bc2;
          w[i] -= lr * mhat / (std::sqrt(vhat) + config.adam_eps);
        }
      }
    }
    model.log.push_back({epoch + 1, loss_sum / static_cast<double>(order.size()), lr});
  }
  return model;
}

std::vector<double> dsvdd_scores(const std::vector<ComplexVector>& cells, const DsvddModel& model,
                                 std::size_t chunk) {
  std::vector<double> scores(cells.size());
  if (cells.empty()) return scores;
  const std::size_t d = model.center.size();
  std::vector<std::size_t> idx;
  for (std::size_t first = 0; first < cells.size(); first += chunk) {
    const std::size_t count = std::min(chunk, cells.size() - first);
    idx.resize(count);
    std::iota(idx.begin(), idx.end(), first);
    const ad::Tensor out = model.net.infer(embed_batch(cells, idx, model.standardization));
    const auto v = out.value();
    for (std::size_t b = 0; b < count; ++b) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = v[b * d + j] - model.center[j];
        s += diff * diff;
      }
      scores[first + b] = s;
    }
  }
  return scores;
}

double dsvdd_score(const ComplexVector& z, const DsvddModel& model) {
  model.net.spec().check_input_length(z.size());
  return dsvdd_scores({z}, model, 1).front();
}

namespace {

constexpr char kMagic[9] = "RADETDN1";
constexpr std::uint32_t kVersion = 1;

void put_values(std::ostream& os, std::span<const double> v) {
  for (double x : v) binio::put(os, x);
}

std::vector<double> get_values(std::istream& is, std::size_t n, const char* what) {
  std::vector<double> v(n);
  for (auto& x : v) x = binio::get<double>(is, what);
  return v;
}

}  // namespace

void save_dsvdd(const std::filesystem::path& path, const DsvddModel& model) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
  const NetworkSpec& spec = model.net.spec();
  binio::put_magic(os, kMagic);
  binio::put<std::uint32_t>(os, kVersion);
  binio::put<std::uint64_t>(os, spec.in_channels);
  binio::put<std::uint64_t>(os, spec.channels.size());
  for (auto c : spec.channels) binio::put<std::uint64_t>(os, c);
  binio::put<std::uint64_t>(os, spec.kernel);
  binio::put<std::uint64_t>(os, spec.stride);
  binio::put<std::uint64_t>(os, spec.padding);
  binio::put<std::uint64_t>(os, spec.pool);
  binio::put(os, spec.leaky_slope);
  binio::put<std::uint64_t>(os, spec.rep_dim);
  binio::put(os, spec.bn_eps);
  binio::put(os, spec.bn_momentum);
  put_values(os, model.standardization.mean);
  put_values(os, model.standardization.std);
  put_values(os, model.center);
  const Network& net = model.net;
  for (std::size_t s = 0; s < spec.channels.size(); ++s) {
    put_values(os, net.conv_weights()[s].value());
    put_values(os, net.bn_scales()[s].value());
    put_values(os, net.bn_states()[s].running_mean);
    put_values(os, net.bn_states()[s].running_var);
  }
  put_values(os, net.fc_weight().value());
  if (!os) fail(ErrorKind::io, "write failed for " + path.string());
}

DsvddModel load_dsvdd(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::io, "cannot open Deep SVDD model " + path.string());
  binio::expect_magic(is, kMagic, path.string());
  if (binio::get<std::uint32_t>(is, "version") != kVersion) {
    fail(ErrorKind::io, path.string() + ": unsupported Deep SVDD model version");
  }
  NetworkSpec spec;
  spec.in_channels = binio::get<std::uint64_t>(is, "in_channels");
  const auto stages = binio::get<std::uint64_t>(is, "stage count");
  if (stages == 0 || stages > 64) fail(ErrorKind::io, path.string() + ": implausible stage count");
  spec.channels.clear();
  for (std::uint64_t s = 0; s < stages; ++s) spec.channels.push_back(binio::get<std::uint64_t>(is, "channels"));
  spec.kernel = binio::get<std::uint64_t>(is, "kernel");
  spec.stride = binio::get<std::uint64_t>(is, "stride");
  spec.padding = binio::get<std::uint64_t>(is, "padding");
  spec.pool = binio::get<std::uint64_t>(is, "pool");
  spec.leaky_slope = binio::get<double>(is, "leaky_slope");
  spec.rep_dim = binio::get<std::uint64_t>(is, "rep_dim");
  spec.bn_eps = binio::get<double>(is, "bn_eps");
  spec.bn_momentum = binio::get<double>(is, "bn_momentum");

  DsvddModel model{Network::initialize(spec, 0), {}, {}, {}};
  const auto mean = get_values(is, 2, "mean");
  const auto sd = get_values(is, 2, "std");
  model.standardization.mean = {mean[0], mean[1]};
  model.standardization.std = {sd[0], sd[1]};
  model.center = get_values(is, spec.rep_dim, "center");
  Network& net = model.net;
  auto fill = [&](ad::Tensor& t, const char* what) {
    const auto v = get_values(is, t.size(), what);
    std::copy(v.begin(), v.end(), t.value().begin());
  };
  for (std::size_t s = 0; s < stages; ++s) {
    fill(net.conv_weights()[s], "conv weight");
    fill(net.bn_scales()[s], "bn scale");
    net.bn_states()[s].running_mean = get_values(is, spec.channels[s], "running mean");
    net.bn_states()[s].running_var = get_values(is, spec.channels[s], "running var");
  }
  fill(net.fc_weight(), "fc weight");
  return model;
}

void write_epoch_log(const std::filesystem::path& path, const std::vector<EpochLog>& log) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
  os.precision(17);
  os << "epoch,mean_loss,lr\n";
  for (const auto& e : log) os << e.epoch << ',' << e.mean_loss << ',' << e.lr << '\n';
}

}  // namespace radet
