#include "radet/linalg.hpp"

#include <cmath>
#include <string>

#include "radet/error.hpp"

namespace radet {

namespace {

void require_same_dim(std::size_t a, std::size_t b, const char* where) {
  if (a != b) {
    fail(ErrorKind::dimension_mismatch,
         std::string(where) + ": dimension " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

ComplexVector::ComplexVector(std::size_t m) : v_(m) {
  if (m == 0) fail(ErrorKind::invalid_parameter, "ComplexVector: length must be positive");
}

ComplexVector::ComplexVector(std::vector<cdouble> entries) : v_(std::move(entries)) {
  if (v_.empty()) fail(ErrorKind::invalid_parameter, "ComplexVector: length must be positive");
  if (!all_finite()) fail(ErrorKind::invalid_data, "ComplexVector: non-finite entry");
}

ComplexVector::ComplexVector(std::initializer_list<cdouble> entries)
    : ComplexVector(std::vector<cdouble>(entries)) {}

double ComplexVector::squared_norm() const noexcept {
  double s = 0.0;
  for (const auto& x : v_) s += std::norm(x);
  return s;
}

bool ComplexVector::all_finite() const noexcept {
  for (const auto& x : v_) {
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
  }
  return true;
}

ComplexVector& ComplexVector::operator+=(const ComplexVector& other) {
  require_same_dim(size(), other.size(), "ComplexVector::operator+=");
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += other.v_[i];
  return *this;
}

ComplexVector& ComplexVector::operator*=(cdouble s) noexcept {
  for (auto& x : v_) x *= s;
  return *this;
}

ComplexVector operator+(ComplexVector a, const ComplexVector& b) {
  a += b;
  return a;
}

ComplexVector operator*(cdouble s, ComplexVector v) {
  v *= s;
  return v;
}

cdouble inner(const ComplexVector& u, const ComplexVector& v) {
  require_same_dim(u.size(), v.size(), "inner");
  cdouble s{};
  for (std::size_t i = 0; i < u.size(); ++i) s += std::conj(u[i]) * v[i];
  return s;
}

double squared_distance(const ComplexVector& a, const ComplexVector& b) {
  require_same_dim(a.size(), b.size(), "squared_distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
  return s;
}

HermitianMatrix::HermitianMatrix(std::size_t m) : m_(m), a_(m * m) {
  if (m == 0) fail(ErrorKind::invalid_parameter, "HermitianMatrix: dimension must be positive");
}

HermitianMatrix HermitianMatrix::identity(std::size_t m) {
  HermitianMatrix a(m);
  for (std::size_t i = 0; i < m; ++i) a.a_[i * m + i] = 1.0;
  return a;
}

HermitianMatrix HermitianMatrix::from_lower(std::size_t m, std::span<const cdouble> row_major) {
  if (row_major.size() != m * m) {
    fail(ErrorKind::dimension_mismatch, "HermitianMatrix::from_lower: buffer is not m x m");
  }
  HermitianMatrix a(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j <= i; ++j) a.set(i, j, row_major[i * m + j]);
  }
  return a;
}

void HermitianMatrix::set(std::size_t i, std::size_t j, cdouble value) {
  if (i == j) {
    a_[i * m_ + i] = value.real();
    return;
  }
  a_[i * m_ + j] = value;
  a_[j * m_ + i] = std::conj(value);
}

void HermitianMatrix::add_outer(const ComplexVector& z, double weight) {
  require_same_dim(m_, z.size(), "HermitianMatrix::add_outer");
  for (std::size_t i = 0; i < m_; ++i) {
    const cdouble zi = weight * z[i];
    for (std::size_t j = 0; j < i; ++j) {
      const cdouble v = zi * std::conj(z[j]);
      a_[i * m_ + j] += v;
      a_[j * m_ + i] += std::conj(v);
    }
    a_[i * m_ + i] += weight * std::norm(z[i]);
  }
}

void HermitianMatrix::add_diagonal(double value) noexcept {
  for (std::size_t i = 0; i < m_; ++i) a_[i * m_ + i] += value;
}

HermitianMatrix& HermitianMatrix::operator*=(double s) noexcept {
  for (auto& x : a_) x *= s;
  return *this;
}

HermitianMatrix& HermitianMatrix::operator+=(const HermitianMatrix& other) {
  require_same_dim(m_, other.m_, "HermitianMatrix::operator+=");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += other.a_[i];
  return *this;
}

double HermitianMatrix::trace() const noexcept {
  double t = 0.0;
  for (std::size_t i = 0; i < m_; ++i) t += a_[i * m_ + i].real();
  return t;
}

double HermitianMatrix::frobenius_norm() const noexcept {
  double s = 0.0;
  for (const auto& x : a_) s += std::norm(x);
  return std::sqrt(s);
}

ComplexVector HermitianMatrix::apply(const ComplexVector& x) const {
  require_same_dim(m_, x.size(), "HermitianMatrix::apply");
  ComplexVector y(m_);
  for (std::size_t i = 0; i < m_; ++i) {
    cdouble s{};
    for (std::size_t j = 0; j < m_; ++j) s += a_[i * m_ + j] * x[j];
    y[i] = s;
  }
  return y;
}

double frobenius_distance(const HermitianMatrix& a, const HermitianMatrix& b) {
  require_same_dim(a.dim(), b.dim(), "frobenius_distance");
  const auto x = a.row_major();
  const auto y = b.row_major();
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::norm(x[i] - y[i]);
  return std::sqrt(s);
}

double relative_frobenius_error(const HermitianMatrix& a, const HermitianMatrix& b) {
  return frobenius_distance(a, b) / b.frobenius_norm();
}

CholeskyFactor::CholeskyFactor(const HermitianMatrix& a) : m_(a.dim()), l_(m_ * m_) {
  for (std::size_t j = 0; j < m_; ++j) {
    double d = a(j, j).real();
    for (std::size_t k = 0; k < j; ++k) d -= std::norm(l_[j * m_ + k]);
    if (!(d > 0.0) || !std::isfinite(d)) {
      fail(ErrorKind::not_positive_definite,
           "cholesky: non-positive pivot " + std::to_string(d) + " at column " + std::to_string(j));
    }
    const double ljj = std::sqrt(d);
    l_[j * m_ + j] = ljj;
    for (std::size_t i = j + 1; i < m_; ++i) {
      cdouble s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l_[i * m_ + k] * std::conj(l_[j * m_ + k]);
      l_[i * m_ + j] = s / ljj;
    }
  }
}

ComplexVector CholeskyFactor::whiten(const ComplexVector& b) const {
  require_same_dim(m_, b.size(), "CholeskyFactor::whiten");
  ComplexVector y(m_);
  for (std::size_t i = 0; i < m_; ++i) {
    cdouble s = b[i];
    const cdouble* row = &l_[i * m_];
    for (std::size_t k = 0; k < i; ++k) s -= row[k] * y[k];
    y[i] = s / row[i].real();
  }
  return y;
}

ComplexVector CholeskyFactor::solve(const ComplexVector& b) const {
  ComplexVector x = whiten(b);
  // back substitution with L^H
  for (std::size_t ii = m_; ii-- > 0;) {
    cdouble s = x[ii];
    for (std::size_t k = ii + 1; k < m_; ++k) s -= std::conj(l_[k * m_ + ii]) * x[k];
    x[ii] = s / l_[ii * m_ + ii].real();
  }
  return x;
}

ComplexVector CholeskyFactor::color(const ComplexVector& w) const {
  require_same_dim(m_, w.size(), "CholeskyFactor::color");
  ComplexVector y(m_);
  for (std::size_t i = 0; i < m_; ++i) {
    cdouble s{};
    for (std::size_t k = 0; k <= i; ++k) s += l_[i * m_ + k] * w[k];
    y[i] = s;
  }
  return y;
}

HermitianMatrix CholeskyFactor::reconstruct() const {
  HermitianMatrix a(m_);
  for (std::size_t i = 0; i < m_; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      cdouble s{};
      for (std::size_t k = 0; k <= j; ++k) s += l_[i * m_ + k] * std::conj(l_[j * m_ + k]);
      a.set(i, j, s);
    }
  }
  return a;
}

HermitianMatrix toeplitz(double rho, std::size_t m) {
  if (!(std::abs(rho) < 1.0)) {
    fail(ErrorKind::invalid_parameter, "toeplitz: |rho| must be < 1, got " + std::to_string(rho));
  }
  if (m == 0) fail(ErrorKind::invalid_parameter, "toeplitz: m must be >= 1");
  HermitianMatrix t(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j <= i; ++j) t.set(i, j, std::pow(rho, static_cast<double>(i - j)));
  }
  return t;
}

CholeskyFactor cholesky(const HermitianMatrix& a) { return CholeskyFactor(a); }

ComplexVector hermitian_solve(const HermitianMatrix& a, const ComplexVector& b) {
  require_same_dim(a.dim(), b.size(), "hermitian_solve");
  return CholeskyFactor(a).solve(b);
}

cdouble sesquilinear_form(const CholeskyFactor& a, const ComplexVector& u, const ComplexVector& v) {
  require_same_dim(u.size(), v.size(), "sesquilinear_form");
  const ComplexVector wu = a.whiten(u);
  if (&u == &v || u == v) return wu.squared_norm();
  return inner(wu, a.whiten(v));
}

cdouble sesquilinear_form(const HermitianMatrix& a, const ComplexVector& u, const ComplexVector& v) {
  require_same_dim(a.dim(), u.size(), "sesquilinear_form");
  return sesquilinear_form(CholeskyFactor(a), u, v);
}

}  // namespace radet
