#include <cmath>
#include <numbers>

#include "radet/classical.hpp"
#include "radet/oracles.hpp"
#include "radet/scene.hpp"
#include "test_support.hpp"

using namespace radet;

namespace {

std::vector<ComplexVector> gaussian_columns(const HermitianMatrix& sigma, std::size_t k, std::uint64_t seed) {
  RandomStream rs(mix64(seed), 0);
  return draw_complex_gaussian(sigma, k, rs);
}

std::vector<ComplexVector> compound_columns(const HermitianMatrix& sigma, std::size_t k, std::uint64_t seed) {
  RandomStream rs(mix64(seed), 1);
  auto cols = draw_complex_gaussian(sigma, k, rs);
  for (auto& c : cols) c *= std::sqrt(draw_texture(1.0, rs));
  return cols;
}

// Reference form with an explicit inverse.
double mf_reference(const ComplexVector& z, const HermitianMatrix& sigma, const ComplexVector& p) {
  const auto inv = testsupport::inverse(testsupport::dense(sigma));
  const std::vector<cdouble> zv(z.begin(), z.end()), pv(p.begin(), p.end());
  const auto iz = testsupport::matvec(inv, zv), ip = testsupport::matvec(inv, pv);
  cdouble num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < zv.size(); ++i) {
    num += std::conj(pv[i]) * iz[i];
    den += std::conj(pv[i]) * ip[i];
  }
  return std::norm(num) / den.real();
}

}  // namespace

TEST_CASE("mf examples") {
  const auto p = steering_vector(3, 16);
  const auto id = true_covariance(HermitianMatrix::identity(16));
  CHECK(mf_statistic(p, id, p) == doctest::Approx(16.0).epsilon(1e-13));
  CHECK(mf_statistic(steering_vector(4, 16), id, p) < 1e-24);
  HermitianMatrix two = HermitianMatrix::identity(16);
  two *= 2.0;
  CHECK(mf_statistic(p, true_covariance(two), p) == doctest::Approx(8.0).epsilon(1e-13));
  CHECK_ERROR_KIND(mf_statistic(ComplexVector(4), id, p), ErrorKind::dimension_mismatch);
}

TEST_CASE("mf and nmf agree with an explicit-inverse reference") {
  RandomStream rs(mix64(31), 0);
  for (int t = 0; t < 20; ++t) {
    const std::size_t m = 2 + static_cast<std::size_t>(t % 7);
    const auto sigma = testsupport::random_pd(m, rs);
    const auto z = testsupport::random_vector(m, rs), p = testsupport::random_vector(m, rs);
    const double mf = mf_statistic(z, true_covariance(sigma), p);
    const double ref = mf_reference(z, sigma, p);
    CHECK(mf == doctest::Approx(ref).epsilon(1e-10));
    const double zz = mf_reference(z, sigma, z);  // |z^H S^-1 z|^2 / z^H S^-1 z
    CHECK(nmf_statistic(z, true_covariance(sigma), p) == doctest::Approx(ref / zz).epsilon(1e-10));
  }
}

TEST_CASE("nmf examples and range") {
  const auto p = steering_vector(2, 16);
  const auto sigma = true_covariance(toeplitz(0.5, 16));
  CHECK(nmf_statistic(cdouble(-2.5, 1.5) * p, sigma, p) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(nmf_statistic(steering_vector(5, 16), true_covariance(HermitianMatrix::identity(16)), p) < 1e-24);
  CHECK_ERROR_KIND(nmf_statistic(ComplexVector(16), sigma, p), ErrorKind::undefined_statistic);
  RandomStream rs(mix64(32), 0);
  for (int t = 0; t < 200; ++t) {
    const double v = nmf_statistic(testsupport::random_vector(16, rs), sigma, p);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("mf phase invariance and nmf scale invariance") {
  RandomStream rs(mix64(33), 0);
  const auto p = steering_vector(1, 8);
  for (int t = 0; t < 50; ++t) {
    const auto sigma = testsupport::random_pd(8, rs);
    const auto z = testsupport::random_vector(8, rs);
    const double theta = 2.0 * std::numbers::pi * rs.uniform();
    const auto est = true_covariance(sigma);
    const double mf = mf_statistic(z, est, p);
    CHECK(mf_statistic(std::polar(1.0, theta) * z, est, p) == doctest::Approx(mf).epsilon(1e-12));

    const double nmf = nmf_statistic(z, est, p);
    const cdouble c = testsupport::random_complex(rs);
    HermitianMatrix scaled = sigma;
    scaled *= 0.1 + 10.0 * rs.uniform();
    CHECK(std::abs(nmf_statistic(c * z, true_covariance(scaled), p) - nmf) < 1e-12);
  }
}

TEST_CASE("scm examples") {
  const ComplexVector z{{1.0, 1.0}, {0.0, -2.0}, {3.0, 0.5}};
  const auto est = scm(std::vector<ComplexVector>(5, z), 0.1);
  CHECK(est.tag == EstimatorTag::scm);
  CHECK(est.k_used == 5);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(std::abs(est.matrix(i, j) - (z[i] * std::conj(z[j]) + (i == j ? 0.1 : 0.0))) < 1e-14);
  CHECK_ERROR_KIND(scm({}), ErrorKind::invalid_parameter);
  CHECK_ERROR_KIND(scm(std::vector<ComplexVector>(2, z)), ErrorKind::not_positive_definite);
  CHECK_ERROR_KIND(scm({z, ComplexVector(2)}), ErrorKind::dimension_mismatch);
}

TEST_CASE("scm is consistent for K = 1e4") {
  const auto t = toeplitz(0.5, 4);
  const auto est = scm(gaussian_columns(t, 10000, 34));
  CHECK(relative_frobenius_error(est.matrix, t) < 0.05);
}

TEST_CASE("tyler with m = 1 returns the scalar 1") {
  RandomStream rs(mix64(35), 0);
  std::vector<ComplexVector> cols;
  for (int k = 0; k < 7; ++k) cols.push_back(ComplexVector{testsupport::random_complex(rs)});
  const auto est = tyler(cols);
  CHECK(est.matrix(0, 0).real() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tyler is invariant to per-column rescaling") {
  RandomStream rs(mix64(36), 0);
  const auto t = toeplitz(0.5, 16);
  for (int trial = 0; trial < 10; ++trial) {
    auto cols = compound_columns(t, 32, 100 + trial);
    const auto base = tyler(cols);
    for (auto& c : cols) c *= 0.01 + 100.0 * rs.uniform();
    const auto scaled = tyler(cols);
    CHECK(relative_frobenius_error(scaled.matrix, base.matrix) < 1e-9);
    CHECK(std::abs(base.matrix.trace() - 16.0) < 16.0 * 1e-9);
    CHECK(tyler_fixed_point_residual(cols, base.matrix) < 1e-8);
  }
}

TEST_CASE("tyler is consistent on compound-Gaussian data") {
  const auto t = toeplitz(0.5, 4);  // trace already equals m
  const auto est = tyler(compound_columns(t, 1000, 37));
  CHECK(relative_frobenius_error(est.matrix, t) < 0.1);
  // the SCM on the same heavy-tailed data serves as a contrast, not a requirement
}

TEST_CASE("tyler residual decreases over its final iterations") {
  for (std::uint64_t seed = 40; seed < 45; ++seed) {
    TylerOptions opt;
    opt.record_residuals = true;
    const auto r = tyler_fit(gaussian_columns(toeplitz(0.5, 16), 32, seed), opt);
    REQUIRE(r.converged);
    REQUIRE(r.residuals.size() >= 11);
    for (std::size_t i = r.residuals.size() - 10; i < r.residuals.size(); ++i)
      CHECK(r.residuals[i] < r.residuals[i - 1]);
  }
}

TEST_CASE("tyler errors") {
  const auto cols = gaussian_columns(toeplitz(0.5, 16), 32, 46);
  try {
    (void)tyler(cols, 1e-8, 2);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.kind() == ErrorKind::convergence_failure);
    CHECK(e.iterations() == 2);
    CHECK(e.residual() > 1e-8);
  }
  auto with_zero = cols;
  with_zero[7] = ComplexVector(16);
  CHECK_ERROR_KIND(tyler(with_zero), ErrorKind::invalid_data);
  CHECK_ERROR_KIND(tyler(std::vector<ComplexVector>(cols.begin(), cols.begin() + 16)), ErrorKind::invalid_parameter);
  CHECK_ERROR_KIND(tyler(cols, 0.0, 100), ErrorKind::invalid_parameter);
}

TEST_CASE("H0 null distributions under the true covariance") {
  Scenario s = Scenario::paper_defaults(ClutterFamily::gaussian);
  const SceneGenerator gen(s);
  const auto sigma = true_covariance(s.total_covariance()).factor();
  const auto p = steering_vector(0, 16);
  const std::size_t n = 100000;
  std::vector<double> mf(n), nmf(n);
  for (std::size_t i = 0; i < n; ++i) {
    RandomStream rs = gen.stream(SplitTag::adhoc, i);
    const auto cell = gen.interference(rs, 0).cell;
    mf[i] = mf_statistic(cell, sigma, p);
    nmf[i] = nmf_statistic(cell, sigma, p);
  }
  CHECK(oracle::ks_distance(mf, oracle::exp1_cdf) < 0.01);
  const double lambda = 1.0 - std::pow(0.01, 1.0 / 15.0);
  double tail = 0.0;
  for (double v : nmf) tail += v > lambda ? 1.0 : 0.0;
  CHECK(std::abs(tail / n - 0.01) < 0.003);
}
