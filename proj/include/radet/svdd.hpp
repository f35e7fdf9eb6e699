#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "radet/linalg.hpp"

namespace radet {

/// exp(-gamma ||x - y||^2) with the complex Euclidean norm.
double rbf_kernel(const ComplexVector& x, const ComplexVector& y, double gamma);

/// 1 / s^2 where s^2 is the mean squared deviation of the points from their
/// mean. Throws degenerate_data when all points coincide.
double kernel_width(const std::vector<ComplexVector>& train);

/// Dense symmetric kernel matrix, row-major. O(N^2) memory.
class GramMatrix {
 public:
  GramMatrix(std::size_t n, std::vector<double> values);
  static GramMatrix rbf(const std::vector<ComplexVector>& points, double gamma);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return k_[i * n_ + j]; }
  const double* row(std::size_t i) const noexcept { return &k_[i * n_]; }

 private:
  std::size_t n_;
  std::vector<double> k_;
};

struct DualSolverOptions {
  double tol = 1e-6;                    // maximal KKT violation at exit
  std::size_t max_pair_updates = 100000;
};

struct DualSolution {
  std::vector<double> alphas;
  double objective = 0.0;  // sum_i a_i K_ii - sum_ij a_i a_j K_ij
  double max_violation = 0.0;
  std::size_t pair_updates = 0;
};

/// sum_i a_i K_ii - a^T K a
double dual_objective(const GramMatrix& gram, const std::vector<double>& alphas);

/// Maximizes the SVDD dual over {sum a = 1, 0 <= a_i <= 1/(nu N)} by pairwise
/// updates on the maximal KKT-violating pair. Throws infeasible when nu N < 1
/// and ConvergenceError when the update cap is hit.
DualSolution solve_dual(const GramMatrix& gram, double nu, const DualSolverOptions& options = {});

struct SvddModel {
  std::vector<ComplexVector> support_points;
  std::vector<double> alphas;
  double gamma = 1.0;
  double const_term = 0.0;  // sum_ij a_i a_j k(z_i, z_j)
  double nu = 0.01;
  std::size_t n_train = 0;

  double box_bound() const noexcept { return 1.0 / (nu * static_cast<double>(n_train)); }
  std::size_t dim() const noexcept { return support_points.front().size(); }
};

/// Support vectors are kept when a_i exceeds this.
inline constexpr double kSupportThreshold = 1e-8;

struct SvddFit {
  SvddModel model;
  DualSolution solution;  // multipliers for every training point
};

/// Kernel width from the data, Gram matrix, dual solve, support extraction.
SvddFit fit_svdd(const std::vector<ComplexVector>& train, double nu = 0.01,
                 const DualSolverOptions& options = {});

/// Squared RKHS distance to the center:
/// k(z,z) - 2 sum_i a_i k(z_i, z) + const_term.
double svdd_score(const ComplexVector& z, const SvddModel& model);

/// R^2 as the mean score of the unbounded support vectors
/// (kSupportThreshold < a_i < box - kSupportThreshold).
double svdd_radius(const SvddModel& model);

/// Binary model file, little-endian:
///   magic "RADETSV1", u32 version (1), u32 m, u64 n_train, f64 nu,
///   f64 gamma, f64 const_term, u64 support count S,
///   then S records of f64 alpha followed by m complex entries (f64 re, f64 im).
void save_svdd(const std::filesystem::path& path, const SvddModel& model);
SvddModel load_svdd(const std::filesystem::path& path);

}  // namespace radet
