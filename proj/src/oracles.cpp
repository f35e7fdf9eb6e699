#include "radet/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace radet::oracle {

double exp1_cdf(double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x); }

double beta1_cdf(double x, double b) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return 1.0 - std::pow(1.0 - x, b);
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_critical(std::size_t n, double alpha) {
  return std::sqrt(-std::log(alpha / 2.0) / 2.0) / std::sqrt(static_cast<double>(n));
}

std::vector<double> project_capped_simplex(std::span<const double> v, double cap) {
  const std::size_t n = v.size();
  if (cap * static_cast<double>(n) < 1.0 - 1e-12) throw std::invalid_argument("capped simplex is empty");
  auto mass = [&](double shift) {
    double s = 0.0;
    for (double x : v) s += std::clamp(x - shift, 0.0, cap);
    return s;
  };
  double lo = *std::min_element(v.begin(), v.end()) - cap - 1.0;
  double hi = *std::max_element(v.begin(), v.end()) + 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mass(mid) > 1.0 ? lo : hi) = mid;
  }
  const double shift = 0.5 * (lo + hi);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::clamp(v[i] - shift, 0.0, cap);
  return out;
}

namespace {

double objective(std::span<const double> k, std::size_t n, const std::vector<double>& a) {
  double lin = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lin += a[i] * k[i * n + i];
    for (std::size_t j = 0; j < n; ++j) quad += a[i] * a[j] * k[i * n + j];
  }
  return lin - quad;
}

}  // namespace

QpResult svdd_dual_projected_gradient(std::span<const double> kernel, std::size_t n, double cap,
                                      std::size_t max_iter, double tol) {
  // minimize f(a) = a^T K a - sum a_i K_ii; grad = 2 K a - diag K
  double lipschitz = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += std::abs(kernel[i * n + j]);
    lipschitz = std::max(lipschitz, 2.0 * row);
  }
  const double step = 1.0 / lipschitz;
  std::vector<double> a = project_capped_simplex(std::vector<double>(n, 1.0 / static_cast<double>(n)), cap);
  std::vector<double> y = a, prev = a, grad(n), trial(n);
  double t = 1.0;
  double f_prev = -objective(kernel, n, a);
  QpResult res;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double g = -kernel[i * n + i];
      for (std::size_t j = 0; j < n; ++j) g += 2.0 * kernel[i * n + j] * y[j];
      trial[i] = y[i] - step * g;
    }
    prev = a;
    a = project_capped_simplex(trial, cap);
    const double f = -objective(kernel, n, a);
    if (f > f_prev) {  // restart momentum
      t = 1.0;
      y = a;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      for (std::size_t i = 0; i < n; ++i) y[i] = a[i] + (t - 1.0) / t_next * (a[i] - prev[i]);
      t = t_next;
    }
    res.iterations = it;
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(a[i] - prev[i]));
    if (change < tol && it > 10) break;
    f_prev = f;
  }
  res.alphas = a;
  res.objective = objective(kernel, n, a);
  return res;
}

std::vector<double> numeric_gradient(const std::function<double(std::span<const double>)>& f,
                                     std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    const double step = h * std::max(1.0, std::abs(orig));
    x[i] = orig + step;
    const double up = f(x);
    x[i] = orig - step;
    const double down = f(x);
    x[i] = orig;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

double max_relative_error(std::span<const double> a, std::span<const double> b, double floor) {
  if (a.size() != b.size()) throw std::invalid_argument("max_relative_error: size mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

}  // namespace radet::oracle
