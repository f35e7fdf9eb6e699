#pragma once

#include <complex>
#include <string>
#include <vector>

#include "doctest.h"
#include "radet/error.hpp"
#include "radet/linalg.hpp"
#include "radet/random.hpp"

// Asserts that `expr` throws radet::Error of the given kind.
#define CHECK_ERROR_KIND(expr, error_kind)                         \
  do {                                                             \
    bool radet_thrown_ = false;                                    \
    try {                                                          \
      (void)(expr);                                                \
    } catch (const radet::Error& radet_e_) {                       \
      radet_thrown_ = true;                                        \
      CHECK_MESSAGE(radet_e_.kind() == (error_kind), std::string(radet_e_.what())); \
    }                                                              \
    CHECK_MESSAGE(radet_thrown_, "expected radet::Error");         \
  } while (0)

namespace testsupport {

using radet::cdouble;
using Dense = std::vector<std::vector<cdouble>>;

inline Dense dense(const radet::HermitianMatrix& a) {
  Dense d(a.dim(), std::vector<cdouble>(a.dim()));
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) d[i][j] = a(i, j);
  return d;
}

inline std::vector<cdouble> matvec(const Dense& a, const std::vector<cdouble>& x) {
  std::vector<cdouble> y(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
  return y;
}

// Gauss-Jordan inverse with partial pivoting; reference only.
inline Dense inverse(Dense a) {
  const std::size_t n = a.size();
  Dense inv(n, std::vector<cdouble>(n));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    std::swap(inv[c], inv[piv]);
    const cdouble d = a[c][c];
    for (std::size_t j = 0; j < n; ++j) {
      a[c][j] /= d;
      inv[c][j] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const cdouble f = a[r][c];
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

inline cdouble random_complex(radet::RandomStream& rs) { return {rs.normal(), rs.normal()}; }

inline radet::ComplexVector random_vector(std::size_t m, radet::RandomStream& rs) {
  radet::ComplexVector v(m);
  for (std::size_t i = 0; i < m; ++i) v[i] = random_complex(rs);
  return v;
}

// B B^H + m I for a random complex B.
inline radet::HermitianMatrix random_pd(std::size_t m, radet::RandomStream& rs) {
  Dense b(m, std::vector<cdouble>(m));
  for (auto& row : b)
    for (auto& x : row) x = random_complex(rs);
  std::vector<cdouble> lower;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      cdouble s = i == j ? cdouble(static_cast<double>(m), 0.0) : cdouble(0.0, 0.0);
      for (std::size_t k = 0; k < m; ++k) s += b[i][k] * std::conj(b[j][k]);
      lower.push_back(s);
    }
  }
  return radet::HermitianMatrix::from_lower(m, lower);
}

}  // namespace testsupport
