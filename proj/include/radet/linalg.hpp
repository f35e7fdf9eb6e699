#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace radet {

using cdouble = std::complex<double>;

/// Dense complex vector of fixed length m > 0 with finite entries.
class ComplexVector {
 public:
  explicit ComplexVector(std::size_t m);
  explicit ComplexVector(std::vector<cdouble> entries);
  ComplexVector(std::initializer_list<cdouble> entries);

  std::size_t size() const noexcept { return v_.size(); }
  cdouble& operator[](std::size_t i) noexcept { return v_[i]; }
  const cdouble& operator[](std::size_t i) const noexcept { return v_[i]; }

  std::span<cdouble> entries() noexcept { return v_; }
  std::span<const cdouble> entries() const noexcept { return v_; }
  auto begin() const noexcept { return v_.begin(); }
  auto end() const noexcept { return v_.end(); }

  double squared_norm() const noexcept;
  bool all_finite() const noexcept;

  ComplexVector& operator+=(const ComplexVector& other);
  ComplexVector& operator*=(cdouble s) noexcept;

  friend bool operator==(const ComplexVector&, const ComplexVector&) = default;

 private:
  std::vector<cdouble> v_;
};

ComplexVector operator+(ComplexVector a, const ComplexVector& b);
ComplexVector operator*(cdouble s, ComplexVector v);

/// u^H v
cdouble inner(const ComplexVector& u, const ComplexVector& v);
double squared_distance(const ComplexVector& a, const ComplexVector& b);

/// m x m Hermitian matrix. Only the lower triangle is ever written; the upper
/// triangle is mirrored on every write so A = A^H holds exactly.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(std::size_t m);
  static HermitianMatrix identity(std::size_t m);
  /// Reads the lower triangle of a row-major m x m buffer and mirrors it.
  /// Imaginary parts on the diagonal are dropped.
  static HermitianMatrix from_lower(std::size_t m, std::span<const cdouble> row_major);

  std::size_t dim() const noexcept { return m_; }
  cdouble operator()(std::size_t i, std::size_t j) const noexcept { return a_[i * m_ + j]; }
  void set(std::size_t i, std::size_t j, cdouble value);

  /// this += weight * z z^H
  void add_outer(const ComplexVector& z, double weight);
  void add_diagonal(double value) noexcept;
  HermitianMatrix& operator*=(double s) noexcept;
  HermitianMatrix& operator+=(const HermitianMatrix& other);

  double trace() const noexcept;
  double frobenius_norm() const noexcept;
  ComplexVector apply(const ComplexVector& x) const;

  std::span<const cdouble> row_major() const noexcept { return a_; }

 private:
  std::size_t m_;
  std::vector<cdouble> a_;
};

double frobenius_distance(const HermitianMatrix& a, const HermitianMatrix& b);
/// ||a - b||_F / ||b||_F
double relative_frobenius_error(const HermitianMatrix& a, const HermitianMatrix& b);

/// Lower-triangular Cholesky factor L with A = L L^H and real positive diagonal.
class CholeskyFactor {
 public:
  explicit CholeskyFactor(const HermitianMatrix& a);

  std::size_t dim() const noexcept { return m_; }
  cdouble operator()(std::size_t i, std::size_t j) const noexcept {
    return j <= i ? l_[i * m_ + j] : cdouble{};
  }

  /// L^{-1} b
  ComplexVector whiten(const ComplexVector& b) const;
  /// A^{-1} b via forward and backward substitution.
  ComplexVector solve(const ComplexVector& b) const;
  /// L x for x with i.i.d. unit-variance entries gives a CN(0, A) draw.
  ComplexVector color(const ComplexVector& w) const;
  /// L L^H, for round-trip checks.
  HermitianMatrix reconstruct() const;

 private:
  std::size_t m_;
  std::vector<cdouble> l_;
};

/// T(rho)_{ij} = rho^{|i-j|}
HermitianMatrix toeplitz(double rho, std::size_t m);

CholeskyFactor cholesky(const HermitianMatrix& a);
ComplexVector hermitian_solve(const HermitianMatrix& a, const ComplexVector& b);
/// u^H A^{-1} v
cdouble sesquilinear_form(const CholeskyFactor& a, const ComplexVector& u, const ComplexVector& v);
cdouble sesquilinear_form(const HermitianMatrix& a, const ComplexVector& u, const ComplexVector& v);

}  // namespace radet
