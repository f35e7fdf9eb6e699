#include "radet/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>

#include "radet/error.hpp"

namespace radet::ad {

namespace {

std::string shape_string(const Shape& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? ", " : "") + std::to_string(s[i]);
  return out + ")";
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.shape().size() != rank) {
    fail(ErrorKind::dimension_mismatch,
         std::string(op) + ": expected rank " + std::to_string(rank) + ", got " + shape_string(t.shape()));
  }
}

void ensure_grad(Node& n) {
  if (n.grad.size() != n.value.size()) n.grad.assign(n.value.size(), 0.0);
}

}  // namespace

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  auto node = std::make_shared<Node>();
  node->value.assign(element_count(shape), 0.0);
  node->shape = std::move(shape);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  if (values.size() != element_count(shape)) {
    fail(ErrorKind::dimension_mismatch, "Tensor::from: " + std::to_string(values.size()) +
                                            " values for shape " + shape_string(shape));
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

double Tensor::item() const {
  if (size() != 1) fail(ErrorKind::dimension_mismatch, "Tensor::item on " + shape_string(shape()));
  return node_->value[0];
}

void Tensor::zero_grad() { std::fill(node_->grad.begin(), node_->grad.end(), 0.0); }

Tensor Tensor::detach_copy() const { return from(shape(), node_->value, false); }

void Tensor::backward() {
  if (size() != 1) fail(ErrorKind::dimension_mismatch, "backward: loss must be a scalar");
  if (!node_->requires_grad) return;

  // iterative post-order DFS; reversed it is a topological order from the root
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node* p = n->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  for (Node* n : order) {
    if (n->backward) n->grad.assign(n->value.size(), 0.0);  // interior: fresh each pass
    else ensure_grad(*n);                                    // leaf: accumulate
  }
  node_->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward) (*it)->backward(**it);
  }
}

Tensor make_result(Shape shape, std::vector<Tensor> parents, std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->value.assign(element_count(shape), 0.0);
  node->shape = std::move(shape);
  for (const auto& p : parents) node->requires_grad = node->requires_grad || p.requires_grad();
  if (node->requires_grad) {
    for (auto& p : parents) node->parents.push_back(p.node());
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

namespace {

// Column matrix of the padded input: row j = (c, k), column n = (b, t),
// entry x[b, c, t*stride + k - padding] or 0 outside the signal.
struct ColumnLayout {
  std::size_t b_n, cin, len, kw, lout, stride, padding;
  std::size_t rows() const { return cin * kw; }
  std::size_t cols() const { return b_n * lout; }
  // source index into x for (j, n), or SIZE_MAX for padding
  std::size_t source(std::size_t c, std::size_t k, std::size_t b, std::size_t t) const {
    const std::ptrdiff_t pos = static_cast<std::ptrdiff_t>(t * stride + k) - static_cast<std::ptrdiff_t>(padding);
    if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(len)) return static_cast<std::size_t>(-1);
    return (b * cin + c) * len + static_cast<std::size_t>(pos);
  }
};

std::vector<double> im2col(const ColumnLayout& g, std::span<const double> x) {
  std::vector<double> col(g.rows() * g.cols(), 0.0);
  for (std::size_t c = 0; c < g.cin; ++c) {
    for (std::size_t k = 0; k < g.kw; ++k) {
      double* row = &col[(c * g.kw + k) * g.cols()];
      for (std::size_t b = 0; b < g.b_n; ++b) {
        for (std::size_t t = 0; t < g.lout; ++t) {
          const std::size_t src = g.source(c, k, b, t);
          if (src != static_cast<std::size_t>(-1)) row[b * g.lout + t] = x[src];
        }
      }
    }
  }
  return col;
}

}  // namespace

Tensor conv1d(const Tensor& x, const Tensor& weight, std::size_t stride, std::size_t padding) {
  require_rank(x, 3, "conv1d");
  require_rank(weight, 3, "conv1d weight");
  const std::size_t b_n = x.dim(0), cin = x.dim(1), len = x.dim(2);
  const std::size_t cout = weight.dim(0), kw = weight.dim(2);
  if (weight.dim(1) != cin) fail(ErrorKind::dimension_mismatch, "conv1d: channel mismatch");
  if (stride == 0 || len + 2 * padding < kw) fail(ErrorKind::dimension_mismatch, "conv1d: input too short");
  const std::size_t lout = (len + 2 * padding - kw) / stride + 1;
  const ColumnLayout g{b_n, cin, len, kw, lout, stride, padding};
  const std::size_t rows = g.rows(), cols = g.cols();

  // y[o, n] = sum_j w[o, j] col[j, n], summed in j order for every n so a
  // row's result does not depend on the rest of the batch
  auto col = std::make_shared<std::vector<double>>(im2col(g, x.value()));
  std::vector<double> ymat(cout * cols, 0.0);
  const auto wv = weight.value();
  for (std::size_t o = 0; o < cout; ++o) {
    double* yr = &ymat[o * cols];
    for (std::size_t j = 0; j < rows; ++j) {
      const double w = wv[o * rows + j];
      const double* cr = &(*col)[j * cols];
      for (std::size_t n = 0; n < cols; ++n) yr[n] += w * cr[n];
    }
  }

  auto xn = x.node();
  auto wn = weight.node();
  Tensor y = make_result({b_n, cout, lout}, {x, weight}, [=](Node& self) {
    // dy as a (cout, cols) matrix
    std::vector<double> dmat(cout * cols);
    for (std::size_t b = 0; b < b_n; ++b)
      for (std::size_t o = 0; o < cout; ++o)
        for (std::size_t t = 0; t < lout; ++t) dmat[o * cols + b * lout + t] = self.grad[(b * cout + o) * lout + t];
    if (wn->requires_grad) {
      for (std::size_t o = 0; o < cout; ++o) {
        const double* dr = &dmat[o * cols];
        for (std::size_t j = 0; j < rows; ++j) {
          const double* cr = &(*col)[j * cols];
          double acc = 0.0;
          for (std::size_t n = 0; n < cols; ++n) acc += dr[n] * cr[n];
          wn->grad[o * rows + j] += acc;
        }
      }
    }
    if (xn->requires_grad) {
      std::vector<double> dcol(rows * cols, 0.0);
      for (std::size_t o = 0; o < cout; ++o) {
        const double* dr = &dmat[o * cols];
        for (std::size_t j = 0; j < rows; ++j) {
          const double w = wn->value[o * rows + j];
          double* dc = &dcol[j * cols];
          for (std::size_t n = 0; n < cols; ++n) dc[n] += w * dr[n];
        }
      }
      for (std::size_t c = 0; c < cin; ++c)
        for (std::size_t k = 0; k < kw; ++k)
          for (std::size_t b = 0; b < b_n; ++b)
            for (std::size_t t = 0; t < lout; ++t) {
              const std::size_t src = g.source(c, k, b, t);
              if (src != static_cast<std::size_t>(-1)) xn->grad[src] += dcol[(c * kw + k) * cols + b * lout + t];
            }
    }
  });

  auto yv = y.value();
  for (std::size_t b = 0; b < b_n; ++b)
    for (std::size_t o = 0; o < cout; ++o)
      for (std::size_t t = 0; t < lout; ++t) yv[(b * cout + o) * lout + t] = ymat[o * cols + b * lout + t];
  return y;
}

namespace {

Tensor batch_norm_impl(const Tensor& x, const Tensor& scale, const BatchNormState& state,
                       BatchNormState* update) {
  const bool training = update != nullptr;
  require_rank(x, 3, "batch_norm");
  const std::size_t b_n = x.dim(0), ch = x.dim(1), len = x.dim(2);
  if (scale.size() != ch || state.running_mean.size() != ch || state.running_var.size() != ch) {
    fail(ErrorKind::dimension_mismatch, "batch_norm: channel mismatch");
  }
  const std::size_t count = b_n * len;
  const auto xv = x.value();

  std::vector<double> mean(ch), inv_std(ch);
  if (training) {
    for (std::size_t c = 0; c < ch; ++c) {
      double s = 0.0;
      for (std::size_t b = 0; b < b_n; ++b) {
        for (std::size_t l = 0; l < len; ++l) s += xv[(b * ch + c) * len + l];
      }
      const double mu = s / static_cast<double>(count);
      double v = 0.0;
      for (std::size_t b = 0; b < b_n; ++b) {
        for (std::size_t l = 0; l < len; ++l) {
          const double d = xv[(b * ch + c) * len + l] - mu;
          v += d * d;
        }
      }
      const double var = v / static_cast<double>(count);
      mean[c] = mu;
      inv_std[c] = 1.0 / std::sqrt(var + state.eps);
      const double unbiased = count > 1 ? v / static_cast<double>(count - 1) : var;
      update->running_mean[c] = (1.0 - state.momentum) * state.running_mean[c] + state.momentum * mu;
      update->running_var[c] = (1.0 - state.momentum) * state.running_var[c] + state.momentum * unbiased;
    }
  } else {
    for (std::size_t c = 0; c < ch; ++c) {
      mean[c] = state.running_mean[c];
      inv_std[c] = 1.0 / std::sqrt(state.running_var[c] + state.eps);
    }
  }

  std::vector<double> xhat(xv.size());
  for (std::size_t b = 0; b < b_n; ++b) {
    for (std::size_t c = 0; c < ch; ++c) {
      for (std::size_t l = 0; l < len; ++l) {
        const std::size_t i = (b * ch + c) * len + l;
        xhat[i] = (xv[i] - mean[c]) * inv_std[c];
      }
    }
  }

  auto xn = x.node();
  auto sn = scale.node();
  Tensor y = make_result(x.shape(), {x, scale}, [=](Node& self) {
    const auto& dy = self.grad;
    for (std::size_t c = 0; c < ch; ++c) {
      const double gamma = sn->value[c];
      double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0, dgamma = 0.0;
      for (std::size_t b = 0; b < b_n; ++b) {
        for (std::size_t l = 0; l < len; ++l) {
          const std::size_t i = (b * ch + c) * len + l;
          dgamma += dy[i] * xhat[i];
          const double dxh = dy[i] * gamma;
          sum_dxhat += dxh;
          sum_dxhat_xhat += dxh * xhat[i];
        }
      }
      if (sn->requires_grad) sn->grad[c] += dgamma;
      if (!xn->requires_grad) continue;
      const double n = static_cast<double>(count);
      for (std::size_t b = 0; b < b_n; ++b) {
        for (std::size_t l = 0; l < len; ++l) {
          const std::size_t i = (b * ch + c) * len + l;
          const double dxh = dy[i] * gamma;
          xn->grad[i] += training
                             ? inv_std[c] * (dxh - sum_dxhat / n - xhat[i] * sum_dxhat_xhat / n)
                             : inv_std[c] * dxh;
        }
      }
    }
  });
  auto yv = y.value();
  const auto sv = scale.value();
  for (std::size_t b = 0; b < b_n; ++b) {
    for (std::size_t c = 0; c < ch; ++c) {
      for (std::size_t l = 0; l < len; ++l) {
        const std::size_t i = (b * ch + c) * len + l;
        yv[i] = sv[c] * xhat[i];
      }
    }
  }
  return y;
}

}  // namespace

Tensor batch_norm(const Tensor& x, const Tensor& scale, BatchNormState& state, bool training) {
  return batch_norm_impl(x, scale, state, training ? &state : nullptr);
}

Tensor batch_norm_eval(const Tensor& x, const Tensor& scale, const BatchNormState& state) {
  return batch_norm_impl(x, scale, state, nullptr);
}

Tensor leaky_relu(const Tensor& x, double negative_slope) {
  auto xn = x.node();
  Tensor y = make_result(x.shape(), {x}, [=](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      xn->grad[i] += self.grad[i] * (xn->value[i] > 0.0 ? 1.0 : negative_slope);
    }
  });
  auto yv = y.value();
  const auto xv = x.value();
  for (std::size_t i = 0; i < xv.size(); ++i) yv[i] = xv[i] > 0.0 ? xv[i] : negative_slope * xv[i];
  return y;
}

Tensor max_pool1d(const Tensor& x, std::size_t size, std::size_t stride) {
  require_rank(x, 3, "max_pool1d");
  const std::size_t rows = x.dim(0) * x.dim(1), len = x.dim(2);
  if (size == 0 || stride == 0 || len < size) fail(ErrorKind::dimension_mismatch, "max_pool1d: input too short");
  const std::size_t lout = (len - size) / stride + 1;
  const auto xv = x.value();
  std::vector<std::size_t> argmax(rows * lout);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t t = 0; t < lout; ++t) {
      std::size_t best = r * len + t * stride;
      for (std::size_t k = 1; k < size; ++k) {
        const std::size_t i = r * len + t * stride + k;
        if (xv[i] > xv[best]) best = i;
      }
      argmax[r * lout + t] = best;
    }
  }
  auto xn = x.node();
  Tensor y = make_result({x.dim(0), x.dim(1), lout}, {x}, [=](Node& self) {
    for (std::size_t i = 0; i < argmax.size(); ++i) xn->grad[argmax[i]] += self.grad[i];
  });
  auto yv = y.value();
  for (std::size_t i = 0; i < argmax.size(); ++i) yv[i] = xv[argmax[i]];
  return y;
}

Tensor adaptive_avg_pool1d(const Tensor& x, std::size_t out) {
  require_rank(x, 3, "adaptive_avg_pool1d");
  const std::size_t rows = x.dim(0) * x.dim(1), len = x.dim(2);
  if (out == 0 || out > len) fail(ErrorKind::dimension_mismatch, "adaptive_avg_pool1d: bad output length");
  auto window = [len, out](std::size_t i) {
    const std::size_t lo = (i * len) / out;
    const std::size_t hi = ((i + 1) * len + out - 1) / out;
    return std::pair{lo, hi};
  };
  auto xn = x.node();
  Tensor y = make_result({x.dim(0), x.dim(1), out}, {x}, [=](Node& self) {
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t i = 0; i < out; ++i) {
        const auto [lo, hi] = window(i);
        const double g = self.grad[r * out + i] / static_cast<double>(hi - lo);
        for (std::size_t l = lo; l < hi; ++l) xn->grad[r * len + l] += g;
      }
    }
  });
  auto yv = y.value();
  const auto xv = x.value();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < out; ++i) {
      const auto [lo, hi] = window(i);
      double s = 0.0;
      for (std::size_t l = lo; l < hi; ++l) s += xv[r * len + l];
      yv[r * out + i] = s / static_cast<double>(hi - lo);
    }
  }
  return y;
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (element_count(shape) != x.size()) {
    fail(ErrorKind::dimension_mismatch,
         "reshape: " + shape_string(x.shape()) + " to " + shape_string(shape));
  }
  auto xn = x.node();
  Tensor y = make_result(std::move(shape), {x}, [=](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) xn->grad[i] += self.grad[i];
  });
  std::copy(x.value().begin(), x.value().end(), y.value().begin());
  return y;
}

Tensor linear(const Tensor& x, const Tensor& weight) {
  require_rank(x, 2, "linear");
  require_rank(weight, 2, "linear weight");
  const std::size_t b_n = x.dim(0), in = x.dim(1), out = weight.dim(0);
  if (weight.dim(1) != in) fail(ErrorKind::dimension_mismatch, "linear: feature mismatch");
  auto xn = x.node();
  auto wn = weight.node();
  Tensor y = make_result({b_n, out}, {x, weight}, [=](Node& self) {
    for (std::size_t b = 0; b < b_n; ++b) {
      for (std::size_t o = 0; o < out; ++o) {
        const double g = self.grad[b * out + o];
        for (std::size_t i = 0; i < in; ++i) {
          if (xn->requires_grad) xn->grad[b * in + i] += g * wn->value[o * in + i];
          if (wn->requires_grad) wn->grad[o * in + i] += g * xn->value[b * in + i];
        }
      }
    }
  });
  auto yv = y.value();
  const auto xv = x.value();
  const auto wv = weight.value();
  for (std::size_t b = 0; b < b_n; ++b) {
    for (std::size_t o = 0; o < out; ++o) {
      double s = 0.0;
      for (std::size_t i = 0; i < in; ++i) s += xv[b * in + i] * wv[o * in + i];
      yv[b * out + o] = s;
    }
  }
  return y;
}

Tensor mean_squared_distance(const Tensor& y, std::span<const double> center) {
  require_rank(y, 2, "mean_squared_distance");
  const std::size_t b_n = y.dim(0), d = y.dim(1);
  if (center.size() != d) fail(ErrorKind::dimension_mismatch, "mean_squared_distance: center size");
  if (b_n == 0) fail(ErrorKind::invalid_parameter, "mean_squared_distance: empty batch");
  std::vector<double> c(center.begin(), center.end());
  auto yn = y.node();
  Tensor loss = make_result({1}, {y}, [=](Node& self) {
    const double g = self.grad[0] * 2.0 / static_cast<double>(b_n);
    for (std::size_t b = 0; b < b_n; ++b) {
      for (std::size_t j = 0; j < d; ++j) yn->grad[b * d + j] += g * (yn->value[b * d + j] - c[j]);
    }
  });
  const auto yv = y.value();
  double s = 0.0;
  for (std::size_t b = 0; b < b_n; ++b) {
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = yv[b * d + j] - c[j];
      s += diff * diff;
    }
  }
  loss.value()[0] = s / static_cast<double>(b_n);
  return loss;
}

Tensor sum_of_squares(const Tensor& w) {
  auto wn = w.node();
  Tensor out = make_result({1}, {w}, [=](Node& self) {
    const double g = 2.0 * self.grad[0];
    for (std::size_t i = 0; i < wn->value.size(); ++i) wn->grad[i] += g * wn->value[i];
  });
  double s = 0.0;
  for (double v : w.value()) s += v * v;
  out.value()[0] = s;
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) fail(ErrorKind::dimension_mismatch, "add: shape mismatch");
  auto an = a.node();
  auto bn = b.node();
  Tensor y = make_result(a.shape(), {a, b}, [=](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (an->requires_grad) an->grad[i] += self.grad[i];
      if (bn->requires_grad) bn->grad[i] += self.grad[i];
    }
  });
  auto yv = y.value();
  for (std::size_t i = 0; i < yv.size(); ++i) yv[i] = a.value()[i] + b.value()[i];
  return y;
}

Tensor scale(const Tensor& a, double s) {
  auto an = a.node();
  Tensor y = make_result(a.shape(), {a}, [=](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += s * self.grad[i];
  });
  auto yv = y.value();
  for (std::size_t i = 0; i < yv.size(); ++i) yv[i] = s * a.value()[i];
  return y;
}

}  // namespace radet::ad
