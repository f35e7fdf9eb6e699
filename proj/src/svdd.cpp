#include "radet/svdd.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "radet/binary_io.hpp"
#include "radet/error.hpp"
#include "radet/parallel.hpp"

namespace radet {

double rbf_kernel(const ComplexVector& x, const ComplexVector& y, double gamma) {
  if (!(gamma > 0.0)) fail(ErrorKind::invalid_parameter, "rbf_kernel: gamma must be > 0");
  return std::exp(-gamma * squared_distance(x, y));
}

double kernel_width(const std::vector<ComplexVector>& train) {
  if (train.size() < 2) fail(ErrorKind::invalid_parameter, "kernel_width: need at least two points");
  const std::size_t m = train.front().size();
  ComplexVector mean(m);
  for (const auto& x : train) mean += x;
  mean *= 1.0 / static_cast<double>(train.size());
  double s2 = 0.0;
  for (const auto& x : train) s2 += squared_distance(x, mean);
  s2 /= static_cast<double>(train.size());
  const bool identical = std::all_of(train.begin(), train.end(),
                                     [&](const ComplexVector& x) { return x == train.front(); });
  if (identical || !(s2 > 0.0)) fail(ErrorKind::degenerate_data, "kernel_width: training data has zero variance");
  return 1.0 / s2;
}

GramMatrix::GramMatrix(std::size_t n, std::vector<double> values) : n_(n), k_(std::move(values)) {
  if (k_.size() != n * n) fail(ErrorKind::dimension_mismatch, "GramMatrix: buffer is not N x N");
}

GramMatrix GramMatrix::rbf(const std::vector<ComplexVector>& points, double gamma) {
  const std::size_t n = points.size();
  std::vector<double> k(n * n);
  parallel_for(n, [&](std::size_t i) {
    k[i * n + i] = 1.0;
    for (std::size_t j = 0; j < i; ++j) k[i * n + j] = rbf_kernel(points[i], points[j], gamma);
  });
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) k[i * n + j] = k[j * n + i];
  }
  return GramMatrix(n, std::move(k));
}

double dual_objective(const GramMatrix& gram, const std::vector<double>& alphas) {
  const std::size_t n = gram.size();
  double linear = 0.0;
  double quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (alphas[i] == 0.0) continue;
    linear += alphas[i] * gram(i, i);
    const double* row = gram.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += row[j] * alphas[j];
    quad += alphas[i] * s;
  }
  return linear - quad;
}

DualSolution solve_dual(const GramMatrix& gram, double nu, const DualSolverOptions& options) {
  const std::size_t n = gram.size();
  if (n == 0) fail(ErrorKind::invalid_parameter, "solve_dual: empty Gram matrix");
  if (!(nu > 0.0 && nu <= 1.0)) fail(ErrorKind::invalid_parameter, "solve_dual: nu must lie in (0, 1]");
  if (nu * static_cast<double>(n) < 1.0 - 1e-12) {
    fail(ErrorKind::infeasible, "solve_dual: nu * N < 1 makes the box-constrained simplex empty");
  }
  const double box = 1.0 / (nu * static_cast<double>(n));

  // Fill the first points up to the box bound until the mass is exhausted.
  std::vector<double> a(n, 0.0);
  double remaining = 1.0;
  for (std::size_t i = 0; i < n && remaining > 0.0; ++i) {
    a[i] = std::min(box, remaining);
    remaining -= a[i];
  }

  // Minimize f(a) = a^T K a - sum_i a_i K_ii; g = 2 K a - diag(K).
  std::vector<double> g(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double* row = gram.row(t);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += row[j] * a[j];
    g[t] = 2.0 * s - gram(t, t);
  }

  DualSolution sol;
  for (;;) {
    // i: may grow (a_i < box), smallest gradient; j: may shrink (a_j > 0), largest gradient.
    std::size_t i = n;
    std::size_t j = n;
    double g_min = std::numeric_limits<double>::infinity();
    double g_max = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      if (a[t] < box && g[t] < g_min) {
        g_min = g[t];
        i = t;
      }
      if (a[t] > 0.0 && g[t] > g_max) {
        g_max = g[t];
        j = t;
      }
    }
    sol.max_violation = (i == n || j == n) ? 0.0 : std::max(0.0, g_max - g_min);
    if (sol.max_violation < options.tol) break;
    if (sol.pair_updates >= options.max_pair_updates) {
      throw ConvergenceError("solve_dual: pair-update cap reached with KKT violation " +
                                 std::to_string(sol.max_violation),
                             sol.max_violation, static_cast<int>(sol.pair_updates));
    }

    const double eta = gram(i, i) + gram(j, j) - 2.0 * gram(i, j);
    const double limit = std::min(box - a[i], a[j]);
    double delta = eta > 1e-12 ? (g_max - g_min) / (2.0 * eta) : limit;
    delta = std::min(delta, limit);

    a[i] += delta;
    a[j] -= delta;
    // snap to the bounds to keep the active sets exact
    if (box - a[i] < 1e-15) a[i] = box;
    if (a[j] < 1e-15 * box) a[j] = 0.0;

    const double* ri = gram.row(i);
    const double* rj = gram.row(j);
    for (std::size_t t = 0; t < n; ++t) g[t] += 2.0 * delta * (ri[t] - rj[t]);
    ++sol.pair_updates;
  }

  sol.alphas = std::move(a);
  sol.objective = dual_objective(gram, sol.alphas);
  return sol;
}

SvddFit fit_svdd(const std::vector<ComplexVector>& train, double nu, const DualSolverOptions& options) {
  if (train.empty()) fail(ErrorKind::invalid_parameter, "fit_svdd: empty training set");
  if (nu * static_cast<double>(train.size()) < 1.0 - 1e-12) {
    fail(ErrorKind::infeasible, "fit_svdd: nu * N < 1; increase nu or the training set");
  }
  const double gamma = kernel_width(train);
  const GramMatrix gram = GramMatrix::rbf(train, gamma);

  SvddFit fit{SvddModel{}, solve_dual(gram, nu, options)};
  SvddModel& model = fit.model;
  model.gamma = gamma;
  model.nu = nu;
  model.n_train = train.size();
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (fit.solution.alphas[i] > kSupportThreshold) support.push_back(i);
  }
  double c = 0.0;
  for (std::size_t i : support) {
    for (std::size_t j : support) c += fit.solution.alphas[i] * fit.solution.alphas[j] * gram(i, j);
  }
  for (std::size_t i : support) {
    model.support_points.push_back(train[i]);
    model.alphas.push_back(fit.solution.alphas[i]);
  }
  model.const_term = c;
  return fit;
}

double svdd_score(const ComplexVector& z, const SvddModel& model) {
  if (z.size() != model.dim()) fail(ErrorKind::dimension_mismatch, "svdd_score: dimension mismatch");
  double cross = 0.0;
  for (std::size_t i = 0; i < model.support_points.size(); ++i) {
    cross += model.alphas[i] * std::exp(-model.gamma * squared_distance(z, model.support_points[i]));
  }
  return 1.0 - 2.0 * cross + model.const_term;
}

double svdd_radius(const SvddModel& model) {
  const double box = model.box_bound();
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < model.alphas.size(); ++i) {
    if (model.alphas[i] > kSupportThreshold && model.alphas[i] < box - kSupportThreshold) {
      sum += svdd_score(model.support_points[i], model);
      ++count;
    }
  }
  if (count == 0) {
    // a single point carries the whole mass when nu N = 1; the sphere is that point
    if (model.alphas.size() == 1) return std::max(0.0, svdd_score(model.support_points[0], model));
    fail(ErrorKind::degenerate_data, "svdd_radius: no unbounded support vector, radius unavailable");
  }
  return sum / static_cast<double>(count);
}

namespace {
constexpr char kMagic[9] = "RADETSV1";
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_svdd(const std::filesystem::path& path, const SvddModel& model) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
  binio::put_magic(os, kMagic);
  binio::put<std::uint32_t>(os, kVersion);
  binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(model.dim()));
  binio::put<std::uint64_t>(os, model.n_train);
  binio::put(os, model.nu);
  binio::put(os, model.gamma);
  binio::put(os, model.const_term);
  binio::put<std::uint64_t>(os, model.support_points.size());
  for (std::size_t i = 0; i < model.support_points.size(); ++i) {
    binio::put(os, model.alphas[i]);
    for (const auto& x : model.support_points[i]) {
      binio::put(os, x.real());
      binio::put(os, x.imag());
    }
  }
  if (!os) fail(ErrorKind::io, "write failed for " + path.string());
}

SvddModel load_svdd(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::io, "cannot open SVDD model " + path.string());
  binio::expect_magic(is, kMagic, path.string());
  if (binio::get<std::uint32_t>(is, "version") != kVersion) {
    fail(ErrorKind::io, path.string() + ": unsupported SVDD model version");
  }
  const auto m = binio::get<std::uint32_t>(is, "m");
  SvddModel model;
  model.n_train = binio::get<std::uint64_t>(is, "n_train");
  model.nu = binio::get<double>(is, "nu");
  model.gamma = binio::get<double>(is, "gamma");
  model.const_term = binio::get<double>(is, "const_term");
  const auto count = binio::get<std::uint64_t>(is, "support count");
  if (m == 0 || count == 0) fail(ErrorKind::io, path.string() + ": empty SVDD model");
  for (std::uint64_t s = 0; s < count; ++s) {
    model.alphas.push_back(binio::get<double>(is, "alpha"));
    std::vector<cdouble> v(m);
    for (auto& x : v) {
      const double re = binio::get<double>(is, "support entry");
      const double im = binio::get<double>(is, "support entry");
      x = {re, im};
    }
    model.support_points.emplace_back(std::move(v));
  }
  return model;
}

}  // namespace radet
