#include "radet/classical.hpp"

#include <algorithm>
#include <cmath>

#include "radet/error.hpp"

namespace radet {

namespace {

void check_secondary(const std::vector<ComplexVector>& secondary, const char* where) {
  if (secondary.empty()) fail(ErrorKind::invalid_parameter, std::string(where) + ": no secondary data");
  const std::size_t m = secondary.front().size();
  for (const auto& z : secondary) {
    if (z.size() != m) fail(ErrorKind::dimension_mismatch, std::string(where) + ": ragged secondary data");
  }
}

void normalize_trace(HermitianMatrix& a) {
  a *= static_cast<double>(a.dim()) / a.trace();
}

HermitianMatrix tyler_update(const std::vector<ComplexVector>& secondary, const CholeskyFactor& chol,
                             double offset) {
  const std::size_t m = chol.dim();
  const double k = static_cast<double>(secondary.size());
  HermitianMatrix next(m);
  for (const auto& z : secondary) {
    const double q = chol.whiten(z).squared_norm() + offset;
    next.add_outer(z, static_cast<double>(m) / (k * q));
  }
  normalize_trace(next);
  return next;
}

}  // namespace

std::string to_string(EstimatorTag tag) {
  switch (tag) {
    case EstimatorTag::true_sigma: return "true_sigma";
    case EstimatorTag::scm: return "scm";
    case EstimatorTag::tyler: return "tyler";
  }
  return "unknown";
}

CovarianceEstimate true_covariance(HermitianMatrix sigma) {
  const std::size_t m = sigma.dim();
  return CovarianceEstimate{std::move(sigma), EstimatorTag::true_sigma, m};
}

double mf_statistic(const ComplexVector& z, const CholeskyFactor& sigma, const ComplexVector& p) {
  if (z.size() != p.size() || z.size() != sigma.dim()) {
    fail(ErrorKind::dimension_mismatch, "mf_statistic: dimensions disagree");
  }
  const ComplexVector wp = sigma.whiten(p);
  const ComplexVector wz = sigma.whiten(z);
  return std::norm(inner(wp, wz)) / wp.squared_norm();
}

double mf_statistic(const ComplexVector& z, const CovarianceEstimate& sigma, const ComplexVector& p) {
  return mf_statistic(z, sigma.factor(), p);
}

double nmf_statistic(const ComplexVector& z, const CholeskyFactor& sigma, const ComplexVector& p) {
  if (z.size() != p.size() || z.size() != sigma.dim()) {
    fail(ErrorKind::dimension_mismatch, "nmf_statistic: dimensions disagree");
  }
  if (z.squared_norm() == 0.0) fail(ErrorKind::undefined_statistic, "nmf_statistic: z = 0");
  const ComplexVector wp = sigma.whiten(p);
  const ComplexVector wz = sigma.whiten(z);
  const double value = std::norm(inner(wp, wz)) / (wp.squared_norm() * wz.squared_norm());
  return std::min(value, 1.0);
}

double nmf_statistic(const ComplexVector& z, const CovarianceEstimate& sigma, const ComplexVector& p) {
  return nmf_statistic(z, sigma.factor(), p);
}

CovarianceEstimate scm(const std::vector<ComplexVector>& secondary, double diagonal_loading) {
  check_secondary(secondary, "scm");
  const std::size_t m = secondary.front().size();
  const std::size_t k = secondary.size();
  if (diagonal_loading < 0.0) fail(ErrorKind::invalid_parameter, "scm: negative diagonal loading");
  if (k < m && diagonal_loading == 0.0) {
    fail(ErrorKind::not_positive_definite,
         "scm: K = " + std::to_string(k) + " < m = " + std::to_string(m) +
             " gives a singular estimate; configure diagonal loading");
  }
  HermitianMatrix s(m);
  const double w = 1.0 / static_cast<double>(k);
  for (const auto& z : secondary) s.add_outer(z, w);
  if (diagonal_loading > 0.0) s.add_diagonal(diagonal_loading);
  return CovarianceEstimate{std::move(s), EstimatorTag::scm, k};
}

TylerResult tyler_fit(const std::vector<ComplexVector>& secondary, const TylerOptions& options) {
  check_secondary(secondary, "tyler");
  const std::size_t m = secondary.front().size();
  const std::size_t k = secondary.size();
  if (k <= m) {
    fail(ErrorKind::invalid_parameter,
         "tyler: need K > m, got K = " + std::to_string(k) + ", m = " + std::to_string(m));
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (secondary[i].squared_norm() == 0.0) {
      fail(ErrorKind::invalid_data, "tyler: secondary column " + std::to_string(i) + " is zero");
    }
  }
  if (!(options.tol > 0.0) || options.max_iter < 1) {
    fail(ErrorKind::invalid_parameter, "tyler: tol must be > 0 and max_iter >= 1");
  }

  TylerResult result{CovarianceEstimate{HermitianMatrix::identity(m), EstimatorTag::tyler, k}, 0, 0.0, false, {}};
  HermitianMatrix& current = result.estimate.matrix;
  for (int it = 1; it <= options.max_iter; ++it) {
    HermitianMatrix next = tyler_update(secondary, cholesky(current), options.denominator_offset);
    const double residual = relative_frobenius_error(next, current);
    current = std::move(next);
    result.iterations = it;
    result.residual = residual;
    if (options.record_residuals) result.residuals.push_back(residual);
    if (residual < options.tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

CovarianceEstimate tyler(const std::vector<ComplexVector>& secondary, double tol, int max_iter) {
  TylerOptions options;
  options.tol = tol;
  options.max_iter = max_iter;
  TylerResult r = tyler_fit(secondary, options);
  if (!r.converged) {
    throw ConvergenceError("tyler: no convergence after " + std::to_string(r.iterations) +
                               " iterations, last relative change " + std::to_string(r.residual),
                           r.residual, r.iterations);
  }
  return std::move(r.estimate);
}

double tyler_fixed_point_residual(const std::vector<ComplexVector>& secondary,
                                  const HermitianMatrix& m_hat) {
  check_secondary(secondary, "tyler_fixed_point_residual");
  const HermitianMatrix rhs = tyler_update(secondary, cholesky(m_hat), 0.0);
  return relative_frobenius_error(rhs, m_hat);
}

}  // namespace radet
