#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace radet::ad {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);

/// Graph node behind a Tensor handle. The backward closure reads this node's
/// gradient and accumulates into its parents' gradients.
struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;
};

/// Reference-semantics handle to a node of the computation graph. Copies
/// share storage, the way parameters are shared between a model and its
/// optimizer.
class Tensor {
 public:
  Tensor() = default;
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t dim(std::size_t axis) const { return node_->shape.at(axis); }
  std::size_t size() const { return node_->value.size(); }
  bool requires_grad() const { return node_->requires_grad; }

  std::span<double> value() { return node_->value; }
  std::span<const double> value() const { return node_->value; }
  /// Empty until a backward pass has reached this tensor.
  std::span<double> grad() { return node_->grad; }
  std::span<const double> grad() const { return node_->grad; }
  double item() const;

  /// Reverse pass from a scalar: seeds d(this)/d(this) = 1 and visits the
  /// graph in reverse topological order.
  void backward();
  void zero_grad();

  /// Deep copy of the values with no history.
  Tensor detach_copy() const;

  std::shared_ptr<Node> node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  friend Tensor make_result(Shape shape, std::vector<Tensor> parents,
                            std::function<void(Node&)> backward);
  std::shared_ptr<Node> node_;
};

/// Creates an op output. The backward closure and parent links are dropped
/// when no parent requires a gradient.
Tensor make_result(Shape shape, std::vector<Tensor> parents, std::function<void(Node&)> backward);

// Operations. Layouts: activations (B, C, L), vectors (B, D).

/// Cross-correlation, weight (Cout, Cin, Kw), zero padding, no bias.
Tensor conv1d(const Tensor& x, const Tensor& weight, std::size_t stride, std::size_t padding);

/// Running statistics for a scale-only batch normalization layer.
struct BatchNormState {
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double momentum = 0.1;
  double eps = 1e-5;
};

/// y = scale_c (x - mean_c) / sqrt(var_c + eps), per channel over (B, L).
/// Training mode uses biased batch statistics and updates the running
/// statistics (unbiased variance); evaluation mode uses the running ones.
Tensor batch_norm(const Tensor& x, const Tensor& scale, BatchNormState& state, bool training);
Tensor batch_norm_eval(const Tensor& x, const Tensor& scale, const BatchNormState& state);

Tensor leaky_relu(const Tensor& x, double negative_slope);

/// Window `size`, step `stride`, no padding; output length (L - size)/stride + 1.
Tensor max_pool1d(const Tensor& x, std::size_t size, std::size_t stride);

/// Averages bins [floor(i L / out), ceil((i+1) L / out)) to length `out`.
Tensor adaptive_avg_pool1d(const Tensor& x, std::size_t out);

Tensor reshape(const Tensor& x, Shape shape);

/// (B, In) x (Out, In)^T -> (B, Out), no bias.
Tensor linear(const Tensor& x, const Tensor& weight);

/// (1/B) sum_i ||y_i - c||^2 for y of shape (B, D).
Tensor mean_squared_distance(const Tensor& y, std::span<const double> center);

/// ||w||_F^2
Tensor sum_of_squares(const Tensor& w);

Tensor add(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);

}  // namespace radet::ad
