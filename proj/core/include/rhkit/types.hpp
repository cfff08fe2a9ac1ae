#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace rhkit {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr double kDefaultTol = 1e-9;
inline constexpr double kPi = 3.14159265358979323846;

// All relative tolerance scaling in the library is against the 1-norm
// (maximum absolute column sum), floored at 1 so that near-zero matrices
// are compared absolutely.
inline double norm1(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

inline double tol_scale(const Matrix& a) { return std::max(1.0, norm1(a)); }

inline bool approx_eq(const Matrix& a, const Matrix& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  if (a.size() == 0) return true;
  double scale = std::max(tol_scale(a), tol_scale(b));
  return norm1(a - b) <= tol * scale;
}

inline Matrix eye(Index n) { return Matrix::Identity(n, n); }

}  // namespace rhkit
