// ---------------------------------------------------------------------------
// Shared helpers for the test suite: readable matrix literals and closeness
// checks that follow the library's relative 1-norm convention.
// ---------------------------------------------------------------------------

#pragma once

#include <rhkit/types.hpp>

#include <algorithm>
#include <initializer_list>
#include <vector>

namespace testutil {

inline rhkit::Matrix mat(
    std::initializer_list<std::initializer_list<rhkit::Complex>> rows) {
  const auto r = rhkit::Index(rows.size());
  const auto c = r ? rhkit::Index(rows.begin()->size()) : 0;
  rhkit::Matrix m(r, c);
  rhkit::Index i = 0;
  for (const auto& row : rows) {
    rhkit::Index j = 0;
    for (const auto& z : row) m(i, j++) = z;
    ++i;
  }
  return m;
}

inline rhkit::Matrix diag(std::initializer_list<rhkit::Complex> entries) {
  rhkit::Matrix m = rhkit::Matrix::Zero(rhkit::Index(entries.size()),
                                        rhkit::Index(entries.size()));
  rhkit::Index i = 0;
  for (const auto& z : entries) m(i, i) = z, ++i;
  return m;
}

inline double max_abs_diff(const rhkit::Matrix& a, const rhkit::Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return 1e300;
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

inline bool near(const rhkit::Matrix& a, const rhkit::Matrix& b,
                 double tol = 1e-9) {
  return rhkit::approx_eq(a, b, tol);
}

// Monic characteristic polynomial coefficients from eigenvalues; comparing
// coefficient vectors is permutation-invariant, unlike sorted eigenvalues.
inline std::vector<rhkit::Complex> charpoly_coeffs(const rhkit::Matrix& a) {
  Eigen::ComplexEigenSolver<rhkit::Matrix> es(a, false);
  std::vector<rhkit::Complex> coeff{1.0};
  for (rhkit::Index i = 0; i < a.rows(); ++i) {
    coeff.push_back(0.0);
    for (size_t j = coeff.size() - 1; j > 0; --j)
      coeff[j] = coeff[j] - es.eigenvalues()(i) * coeff[j - 1];
  }
  return coeff;
}

inline double charpoly_dist(const rhkit::Matrix& a, const rhkit::Matrix& b) {
  auto ca = charpoly_coeffs(a), cb = charpoly_coeffs(b);
  if (ca.size() != cb.size()) return 1e300;
  double d = 0.0;
  for (size_t i = 0; i < ca.size(); ++i)
    d = std::max(d, std::abs(ca[i] - cb[i]));
  return d;
}

}  // namespace testutil
