#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

/// Reference computations that share no code with the production solvers.
/// Used by `radet verify` and by the test suites.
namespace radet::oracle {

double exp1_cdf(double x);
/// CDF of Beta(1, b): 1 - (1 - x)^b on [0, 1].
double beta1_cdf(double x, double b);

/// Kolmogorov-Smirnov sup distance between the empirical CDF and `cdf`.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);
/// Asymptotic critical value sqrt(-ln(alpha / 2) / 2) / sqrt(n).
double ks_critical(std::size_t n, double alpha);

/// Euclidean projection onto {a : sum a = 1, 0 <= a_i <= cap}, by bisection
/// on the multiplier of the equality constraint.
std::vector<double> project_capped_simplex(std::span<const double> v, double cap);

struct QpResult {
  std::vector<double> alphas;
  double objective = 0.0;  // sum a_i K_ii - a^T K a (to be maximized)
  std::size_t iterations = 0;
};

/// Accelerated projected gradient on the SVDD dual for a small dense kernel
/// matrix (row-major n x n).
QpResult svdd_dual_projected_gradient(std::span<const double> kernel, std::size_t n, double cap,
                                      std::size_t max_iter = 200000, double tol = 1e-14);

/// Central differences of `f` at `x`, step h * max(1, |x_i|).
std::vector<double> numeric_gradient(const std::function<double(std::span<const double>)>& f,
                                     std::vector<double> x, double h = 1e-6);

/// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor)
double max_relative_error(std::span<const double> a, std::span<const double> b, double floor = 1e-6);

}  // namespace radet::oracle
