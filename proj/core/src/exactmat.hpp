// ---------------------------------------------------------------------------
// exactmat.hpp  (private to the core sources)
//
// Exact Gaussian-rational scalars, a small dense matrix over them, reduced
// row echelon form, kernels, inverses, characteristic polynomials
// (Faddeev-LeVerrier) and squarefree factorization.  Used by the exact mode
// of the finite-description algorithms, where rank decisions must not go
// through floating point.
// ---------------------------------------------------------------------------

#pragma once

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rhkit/rational.hpp"
#include "rhkit/types.hpp"

namespace rhkit {

struct GaussRat {
  Rational re, im;

  GaussRat() : re(0), im(0) {}
  GaussRat(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
  explicit GaussRat(long v) : re(v), im(0) {}

  // Doubles are dyadic rationals, so this conversion is exact.
  static GaussRat from_complex(const Complex& z) {
    return GaussRat(Rational(z.real()), Rational(z.imag()));
  }
  Complex to_complex() const {
    return Complex(rational_to_double(re), rational_to_double(im));
  }
  bool is_zero() const { return re == 0 && im == 0; }

  friend GaussRat operator+(const GaussRat& a, const GaussRat& b) {
    return GaussRat(a.re + b.re, a.im + b.im);
  }
  friend GaussRat operator-(const GaussRat& a, const GaussRat& b) {
    return GaussRat(a.re - b.re, a.im - b.im);
  }
  friend GaussRat operator-(const GaussRat& a) {
    return GaussRat(-a.re, -a.im);
  }
  friend GaussRat operator*(const GaussRat& a, const GaussRat& b) {
    return GaussRat(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re);
  }
  friend GaussRat operator/(const GaussRat& a, const GaussRat& b) {
    Rational d = b.re * b.re + b.im * b.im;
    if (d == 0) throw std::domain_error("GaussRat: division by zero");
    return GaussRat((a.re * b.re + a.im * b.im) / d,
                    (a.im * b.re - a.re * b.im) / d);
  }
  GaussRat& operator+=(const GaussRat& b) { return *this = *this + b; }
  GaussRat& operator-=(const GaussRat& b) { return *this = *this - b; }
  GaussRat& operator*=(const GaussRat& b) { return *this = *this * b; }
  friend bool operator==(const GaussRat& a, const GaussRat& b) {
    return a.re == b.re && a.im == b.im;
  }
  friend bool operator!=(const GaussRat& a, const GaussRat& b) {
    return !(a == b);
  }
};

struct RatMat {
  Index rows = 0, cols = 0;
  std::vector<GaussRat> a;

  RatMat() = default;
  RatMat(Index r, Index c) : rows(r), cols(c), a(size_t(r) * size_t(c)) {}

  GaussRat& operator()(Index i, Index j) {
    return a[size_t(i) * size_t(cols) + size_t(j)];
  }
  const GaussRat& operator()(Index i, Index j) const {
    return a[size_t(i) * size_t(cols) + size_t(j)];
  }

  static RatMat identity(Index n) {
    RatMat m(n, n);
    for (Index i = 0; i < n; ++i) m(i, i) = GaussRat(1);
    return m;
  }
  static RatMat from_eigen(const Matrix& x) {
    RatMat m(x.rows(), x.cols());
    for (Index i = 0; i < x.rows(); ++i)
      for (Index j = 0; j < x.cols(); ++j)
        m(i, j) = GaussRat::from_complex(x(i, j));
    return m;
  }
  Matrix to_eigen() const {
    Matrix x(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) x(i, j) = (*this)(i, j).to_complex();
    return x;
  }

  friend RatMat operator*(const RatMat& x, const RatMat& y) {
    if (x.cols != y.rows) throw std::invalid_argument("RatMat: shape mismatch");
    RatMat z(x.rows, y.cols);
    for (Index i = 0; i < x.rows; ++i)
      for (Index k = 0; k < x.cols; ++k) {
        const GaussRat& xik = x(i, k);
        if (xik.is_zero()) continue;
        for (Index j = 0; j < y.cols; ++j) z(i, j) += xik * y(k, j);
      }
    return z;
  }
  friend RatMat operator+(const RatMat& x, const RatMat& y) {
    if (x.rows != y.rows || x.cols != y.cols)
      throw std::invalid_argument("RatMat: shape mismatch");
    RatMat z(x.rows, x.cols);
    for (size_t i = 0; i < z.a.size(); ++i) z.a[i] = x.a[i] + y.a[i];
    return z;
  }
  friend RatMat operator-(const RatMat& x, const RatMat& y) {
    if (x.rows != y.rows || x.cols != y.cols)
      throw std::invalid_argument("RatMat: shape mismatch");
    RatMat z(x.rows, x.cols);
    for (size_t i = 0; i < z.a.size(); ++i) z.a[i] = x.a[i] - y.a[i];
    return z;
  }
  RatMat scaled(const GaussRat& c) const {
    RatMat z(rows, cols);
    for (size_t i = 0; i < a.size(); ++i) z.a[i] = a[i] * c;
    return z;
  }
  GaussRat trace() const {
    GaussRat t;
    for (Index i = 0; i < rows && i < cols; ++i) t += (*this)(i, i);
    return t;
  }
};

// In-place reduced row echelon form; returns the pivot column list.
inline std::vector<Index> rref(RatMat& m) {
  std::vector<Index> pivots;
  Index row = 0;
  for (Index col = 0; col < m.cols && row < m.rows; ++col) {
    Index pr = -1;
    for (Index i = row; i < m.rows; ++i)
      if (!m(i, col).is_zero()) {
        pr = i;
        break;
      }
    if (pr < 0) continue;
    if (pr != row)
      for (Index j = 0; j < m.cols; ++j) std::swap(m(pr, j), m(row, j));
    GaussRat inv = GaussRat(1) / m(row, col);
    for (Index j = col; j < m.cols; ++j) m(row, j) = m(row, j) * inv;
    for (Index i = 0; i < m.rows; ++i) {
      if (i == row || m(i, col).is_zero()) continue;
      GaussRat f = m(i, col);
      for (Index j = col; j < m.cols; ++j) m(i, j) -= f * m(row, j);
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

inline Index rat_rank(RatMat m) { return Index(rref(m).size()); }

// Columns spanning the kernel of m.
inline RatMat rat_kernel(RatMat m) {
  Index n = m.cols;
  std::vector<Index> pivots = rref(m);
  std::vector<bool> is_pivot(size_t(n), false);
  for (Index p : pivots) is_pivot[size_t(p)] = true;
  Index free_count = n - Index(pivots.size());
  RatMat k(n, free_count);
  Index fc = 0;
  for (Index col = 0; col < n; ++col) {
    if (is_pivot[size_t(col)]) continue;
    k(col, fc) = GaussRat(1);
    for (size_t pi = 0; pi < pivots.size(); ++pi)
      k(pivots[pi], fc) = -m(Index(pi), col);
    ++fc;
  }
  return k;
}

inline std::optional<RatMat> rat_inverse(const RatMat& m) {
  if (m.rows != m.cols) return std::nullopt;
  Index n = m.rows;
  RatMat aug(n, 2 * n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) aug(i, j) = m(i, j);
    aug(i, n + i) = GaussRat(1);
  }
  std::vector<Index> pivots = rref(aug);
  if (Index(pivots.size()) != n || (n > 0 && pivots.back() >= n))
    return std::nullopt;
  RatMat inv(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) inv(i, j) = aug(i, n + j);
  return inv;
}

// Solve a * x = b exactly; nullopt when inconsistent.
inline std::optional<RatMat> rat_solve(const RatMat& a, const RatMat& b) {
  if (a.rows != b.rows) throw std::invalid_argument("rat_solve: shape");
  RatMat aug(a.rows, a.cols + b.cols);
  for (Index i = 0; i < a.rows; ++i) {
    for (Index j = 0; j < a.cols; ++j) aug(i, j) = a(i, j);
    for (Index j = 0; j < b.cols; ++j) aug(i, a.cols + j) = b(i, j);
  }
  std::vector<Index> pivots = rref(aug);
  for (Index p : pivots)
    if (p >= a.cols) return std::nullopt;  // inconsistent system
  RatMat x(a.cols, b.cols);
  for (size_t pi = 0; pi < pivots.size(); ++pi)
    for (Index j = 0; j < b.cols; ++j)
      x(pivots[pi], j) = aug(Index(pi), a.cols + j);
  return x;
}

// --- polynomials over the Gaussian rationals (ascending coefficients) ----

using RatPoly = std::vector<GaussRat>;

inline void poly_trim(RatPoly& p) {
  while (!p.empty() && p.back().is_zero()) p.pop_back();
}

inline Index poly_deg(const RatPoly& p) { return Index(p.size()) - 1; }

inline RatPoly poly_derivative(const RatPoly& p) {
  RatPoly d;
  for (size_t i = 1; i < p.size(); ++i)
    d.push_back(p[i] * GaussRat(long(i)));
  poly_trim(d);
  return d;
}

inline RatPoly poly_monic(RatPoly p) {
  poly_trim(p);
  if (p.empty()) return p;
  GaussRat lead = p.back();
  for (GaussRat& c : p) c = c / lead;
  return p;
}

// Division with remainder: returns {quotient, remainder}.
inline std::pair<RatPoly, RatPoly> poly_divmod(RatPoly num, const RatPoly& den) {
  poly_trim(num);
  RatPoly d = den;
  poly_trim(d);
  if (d.empty()) throw std::domain_error("poly division by zero");
  RatPoly q(num.size(), GaussRat());
  while (num.size() >= d.size() && !num.empty()) {
    GaussRat f = num.back() / d.back();
    size_t shift = num.size() - d.size();
    q[shift] = f;
    for (size_t i = 0; i < d.size(); ++i) num[shift + i] -= f * d[i];
    poly_trim(num);
  }
  poly_trim(q);
  return {q, num};
}

inline RatPoly poly_gcd(RatPoly a, RatPoly b) {
  poly_trim(a);
  poly_trim(b);
  while (!b.empty()) {
    RatPoly r = poly_divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  return poly_monic(a);
}

// Squarefree decomposition f = prod factors[i].poly ^ factors[i].multiplicity
// (char 0, repeated-gcd form).
struct SquarefreeFactor {
  RatPoly poly;
  Index multiplicity = 1;
};

inline std::vector<SquarefreeFactor> squarefree_factors(RatPoly f) {
  std::vector<SquarefreeFactor> out;
  f = poly_monic(std::move(f));
  if (poly_deg(f) < 1) return out;
  RatPoly g = poly_gcd(f, poly_derivative(f));
  RatPoly b = poly_divmod(f, g).first;  // squarefree part
  RatPoly c = std::move(g);
  Index i = 1;
  while (poly_deg(b) >= 1) {
    RatPoly d = poly_gcd(b, c);
    RatPoly factor = poly_divmod(b, d).first;
    if (poly_deg(factor) >= 1) out.push_back({poly_monic(factor), i});
    b = std::move(d);
    c = poly_divmod(c, b).first;
    ++i;
  }
  return out;
}

// Characteristic polynomial of a square matrix, ascending coefficients,
// monic of degree n (Faddeev-LeVerrier; exact in char 0).
inline RatPoly rat_charpoly(const RatMat& a) {
  if (a.rows != a.cols) throw std::invalid_argument("charpoly: square needed");
  Index n = a.rows;
  RatPoly coef(size_t(n) + 1, GaussRat());
  coef[size_t(n)] = GaussRat(1);
  RatMat m = RatMat::identity(n);
  GaussRat c(1);
  for (Index k = 1; k <= n; ++k) {
    RatMat prev = m;
    for (Index i = 0; i < n; ++i) prev(i, i) += c;
    m = a * prev;
    c = -(m.trace() / GaussRat(long(k)));
    coef[size_t(n - k)] = c;
  }
  return coef;
}

inline RatMat poly_eval_matrix(const RatPoly& p, const RatMat& x) {
  Index n = x.rows;
  RatMat acc(n, n);
  for (size_t i = p.size(); i-- > 0;) {
    acc = acc * x;
    for (Index d = 0; d < n; ++d) acc(d, d) += p[i];
  }
  return acc;
}

}  // namespace rhkit
