#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "radet/linalg.hpp"

namespace radet {

enum class EstimatorTag { true_sigma, scm, tyler };

std::string to_string(EstimatorTag tag);

/// A covariance matrix together with where it came from. Positive
/// definiteness is checked when the estimate is factored.
struct CovarianceEstimate {
  HermitianMatrix matrix;
  EstimatorTag tag = EstimatorTag::true_sigma;
  std::size_t k_used = 0;

  CholeskyFactor factor() const { return cholesky(matrix); }
};

CovarianceEstimate true_covariance(HermitianMatrix sigma);

/// |p^H S^-1 z|^2 / (p^H S^-1 p). With an SCM estimate this is the AMF.
double mf_statistic(const ComplexVector& z, const CholeskyFactor& sigma, const ComplexVector& p);
double mf_statistic(const ComplexVector& z, const CovarianceEstimate& sigma, const ComplexVector& p);

/// |p^H S^-1 z|^2 / ((p^H S^-1 p)(z^H S^-1 z)), in [0, 1]. With a plugged-in
/// estimate this is the ANMF. Throws undefined_statistic for z = 0.
double nmf_statistic(const ComplexVector& z, const CholeskyFactor& sigma, const ComplexVector& p);
double nmf_statistic(const ComplexVector& z, const CovarianceEstimate& sigma, const ComplexVector& p);

/// (1/K) sum_k z_k z_k^H, optionally plus diagonal_loading * I.
/// K < m without loading is rejected since the estimate would be singular.
CovarianceEstimate scm(const std::vector<ComplexVector>& secondary, double diagonal_loading = 0.0);

struct TylerOptions {
  double tol = 1e-8;
  int max_iter = 100;
  /// Added to every quadratic-form denominator. Must stay 0 in real use: a
  /// nonzero value breaks scale invariance and exists so the verification
  /// suite can demonstrate that it catches a corrupted update.
  double denominator_offset = 0.0;
  bool record_residuals = false;
};

struct TylerResult {
  CovarianceEstimate estimate;
  int iterations = 0;
  double residual = 0.0;  // relative Frobenius change of the last update
  bool converged = false;
  std::vector<double> residuals;  // filled when record_residuals is set
};

/// Fixed-point iteration M <- (m/K) sum_k z_k z_k^H / (z_k^H M^-1 z_k) from
/// M = I, trace renormalized to m after every update. Never throws on
/// non-convergence; inspect `converged`.
TylerResult tyler_fit(const std::vector<ComplexVector>& secondary, const TylerOptions& options = {});

/// As tyler_fit but throws ConvergenceError when max_iter is reached.
CovarianceEstimate tyler(const std::vector<ComplexVector>& secondary, double tol = 1e-8,
                         int max_iter = 100);

/// Relative Frobenius residual of the fixed-point equation at `m_hat`, after
/// trace normalization of the right-hand side.
double tyler_fixed_point_residual(const std::vector<ComplexVector>& secondary,
                                  const HermitianMatrix& m_hat);

}  // namespace radet
