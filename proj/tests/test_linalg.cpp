#include <cmath>

#include "test_support.hpp"

using namespace radet;
using namespace testsupport;

TEST_CASE("ComplexVector rejects empty and non-finite entries") {
  CHECK_ERROR_KIND(ComplexVector(std::vector<cdouble>{}), ErrorKind::invalid_parameter);
  CHECK_ERROR_KIND(ComplexVector({cdouble(1.0, NAN)}), ErrorKind::invalid_data);
  CHECK_ERROR_KIND(ComplexVector({cdouble(INFINITY, 0.0)}), ErrorKind::invalid_data);
  const ComplexVector v{{3.0, 4.0}, {0.0, 1.0}};
  CHECK(v.squared_norm() == doctest::Approx(26.0));
}

TEST_CASE("toeplitz entries follow rho^|i-j|") {
  const auto t = toeplitz(0.5, 3);
  const double expected[3][3] = {{1, .5, .25}, {.5, 1, .5}, {.25, .5, 1}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(t(i, j) == cdouble(expected[i][j], 0.0));

  const auto t16 = toeplitz(0.5, 16);
  CHECK(t16.trace() == doctest::Approx(16.0));
  for (std::size_t i = 0; i + 1 < 16; ++i) {
    CHECK(t16(i, i) == cdouble(1.0, 0.0));
    CHECK(t16(i, i + 1) == cdouble(0.5, 0.0));
  }
  const auto id = toeplitz(0.0, 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(id(i, j) == cdouble(i == j ? 1.0 : 0.0, 0.0));
}

TEST_CASE("toeplitz rejects |rho| >= 1") {
  CHECK_ERROR_KIND(toeplitz(1.0, 4), ErrorKind::invalid_parameter);
  CHECK_ERROR_KIND(toeplitz(-1.2, 4), ErrorKind::invalid_parameter);
  CHECK_ERROR_KIND(toeplitz(0.5, 0), ErrorKind::invalid_parameter);
}

TEST_CASE("toeplitz is positive definite over a parameter grid") {
  for (double rho : {0.0, 0.5, -0.5, 0.9, -0.9}) {
    for (std::size_t m : {2u, 4u, 8u, 16u}) {
      CAPTURE(rho);
      CAPTURE(m);
      CHECK_NOTHROW(cholesky(toeplitz(rho, m)));
    }
  }
}

TEST_CASE("HermitianMatrix mirrors writes and keeps a real diagonal") {
  HermitianMatrix a(3);
  a.set(2, 0, {1.0, 2.0});
  CHECK(a(0, 2) == cdouble(1.0, -2.0));
  a.set(1, 1, {5.0, 3.0});
  CHECK(a(1, 1) == cdouble(5.0, 0.0));
}

TEST_CASE("cholesky on simple matrices") {
  const auto id = cholesky(HermitianMatrix::identity(4));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j <= i; ++j) CHECK(id(i, j) == cdouble(i == j ? 1.0 : 0.0, 0.0));

  HermitianMatrix d(2);
  d.set(0, 0, 4.0);
  d.set(1, 1, 9.0);
  const auto l = cholesky(d);
  CHECK(l(0, 0).real() == doctest::Approx(2.0));
  CHECK(l(1, 1).real() == doctest::Approx(3.0));
  CHECK(std::abs(l(1, 0)) == doctest::Approx(0.0));
}

TEST_CASE("cholesky rejects indefinite matrices") {
  HermitianMatrix a(2);
  a.set(0, 0, 1.0);
  a.set(1, 1, 1.0);
  a.set(1, 0, 2.0);
  CHECK_ERROR_KIND(cholesky(a), ErrorKind::not_positive_definite);
  CHECK_ERROR_KIND(cholesky(HermitianMatrix(3)), ErrorKind::not_positive_definite);
}

TEST_CASE("cholesky round trip and solve residual on random PD matrices") {
  RandomStream rs(mix64(11), 0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 1 + static_cast<std::size_t>(trial % 16);
    const auto a = random_pd(m, rs);
    const auto l = cholesky(a);
    CHECK(relative_frobenius_error(l.reconstruct(), a) < 1e-10);
    for (std::size_t i = 0; i < m; ++i) {
      CHECK(l(i, i).imag() == 0.0);
      CHECK(l(i, i).real() > 0.0);
    }
    const auto b = random_vector(m, rs);
    const auto x = hermitian_solve(a, b);
    const auto ax = matvec(dense(a), {x.begin(), x.end()});
    double num = 0.0;
    for (std::size_t i = 0; i < m; ++i) num += std::norm(ax[i] - b[i]);
    CHECK(std::sqrt(num / b.squared_norm()) < 1e-10);
  }
}

TEST_CASE("hermitian_solve simple systems") {
  const ComplexVector b{{1.0, 2.0}, {-3.0, 0.5}};
  const auto x = hermitian_solve(HermitianMatrix::identity(2), b);
  CHECK(std::abs(x[0] - b[0]) < 1e-15);
  CHECK(std::abs(x[1] - b[1]) < 1e-15);

  auto two = HermitianMatrix::identity(2);
  two *= 2.0;
  const auto y = hermitian_solve(two, ComplexVector{{1.0, 0.0}, {1.0, 0.0}});
  CHECK(y[0].real() == doctest::Approx(0.5));
  CHECK(y[1].real() == doctest::Approx(0.5));

  CHECK_ERROR_KIND(hermitian_solve(two, ComplexVector(3)), ErrorKind::dimension_mismatch);
}

TEST_CASE("sesquilinear_form simple values") {
  const auto p = ComplexVector(std::vector<cdouble>(16, cdouble(1.0, 0.0)));
  const auto f = sesquilinear_form(HermitianMatrix::identity(16), p, p);
  CHECK(f.real() == doctest::Approx(16.0));
  CHECK(f.imag() == 0.0);

  auto two = HermitianMatrix::identity(4);
  two *= 2.0;
  const ComplexVector u{{1.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}, {0.0, -1.0}};
  CHECK(sesquilinear_form(two, u, u).real() == doctest::Approx(2.0));

  const ComplexVector e1{{1.0, 0.0}, {0.0, 0.0}};
  const ComplexVector e2{{0.0, 0.0}, {1.0, 0.0}};
  CHECK(std::abs(sesquilinear_form(HermitianMatrix::identity(2), e1, e2)) == 0.0);
  CHECK_ERROR_KIND(sesquilinear_form(two, u, e1), ErrorKind::dimension_mismatch);
}

TEST_CASE("sesquilinear_form matches an explicit inverse") {
  RandomStream rs(mix64(12), 0);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t m = 2 + static_cast<std::size_t>(trial % 15);
    const auto a = random_pd(m, rs);
    const auto u = random_vector(m, rs);
    const auto v = random_vector(m, rs);
    const auto ainv_v = matvec(inverse(dense(a)), {v.begin(), v.end()});
    cdouble expected = 0.0;
    for (std::size_t i = 0; i < m; ++i) expected += std::conj(u[i]) * ainv_v[i];
    const cdouble got = sesquilinear_form(a, u, v);
    CHECK(std::abs(got - expected) <= 1e-10 * std::max(1.0, std::abs(expected)));

    const cdouble uu = sesquilinear_form(a, u, u);
    CHECK(uu.imag() == 0.0);
    CHECK(uu.real() >= 0.0);
  }
}
