#include "rhkit/local_model.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <limits>
#include <random>
#include <stdexcept>

namespace rhkit {

namespace {

double rel(const Matrix& diff, double scale) {
  return norm1(diff) / std::max(1.0, scale);
}

// Distance between the multisets of eigenvalues that lie outside the
// zero-floor, by greedy matching.  Zero for models that satisfy the
// factorization identities exactly.
double nonzero_spectrum_distance(const Matrix& a, const Matrix& b, double floor_) {
  auto nonzero_eigs = [&](const Matrix& m) {
    std::vector<Complex> out;
    if (m.rows() == 0) return out;
    Eigen::ComplexEigenSolver<Matrix> es(m, false);
    for (Index i = 0; i < m.rows(); ++i)
      if (std::abs(es.eigenvalues()(i)) > floor_) out.push_back(es.eigenvalues()(i));
    return out;
  };
  std::vector<Complex> ea = nonzero_eigs(a), eb = nonzero_eigs(b);
  if (ea.size() != eb.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  std::vector<bool> used(eb.size(), false);
  for (Complex x : ea) {
    double best = std::numeric_limits<double>::infinity();
    size_t pick = eb.size();
    for (size_t j = 0; j < eb.size(); ++j) {
      if (used[j]) continue;
      double d = std::abs(x - eb[j]);
      if (d < best) { best = d; pick = j; }
    }
    if (pick == eb.size()) return std::numeric_limits<double>::infinity();
    used[pick] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

Index rank_by_svd(const Matrix& a, double tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(a);
  double top = svd.singularValues()(0);
  if (top == 0.0) return 0;
  Index r = 0;
  for (Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > tol * top) ++r;
  return r;
}

// Deterministic phase gauge: scale each column so its largest entry is
// real positive.
void fix_column_phases(Matrix& b) {
  for (Index j = 0; j < b.cols(); ++j) {
    Index imax = 0;
    b.col(j).cwiseAbs().maxCoeff(&imax);
    Complex v = b(imax, j);
    if (std::abs(v) > 0) b.col(j) *= std::conj(v) / std::abs(v);
  }
}

bool invertible_enough(const Matrix& g, double cutoff = 1e-6) {
  if (g.rows() != g.cols()) return false;
  if (g.size() == 0) return true;
  Eigen::JacobiSVD<Matrix> svd(g);
  const auto& sv = svd.singularValues();
  return sv(0) > 0 && sv(sv.size() - 1) > cutoff * sv(0);
}

}  // namespace

ValidationReport validate(const LocalModel& m, double tol) {
  ValidationReport rep;
  const Index n = m.n(), mm = m.m();
  if (m.r.cols() != n || m.theta_f.cols() != mm || m.t.rows() != mm ||
      m.t.cols() != n || m.s.rows() != n || m.s.cols() != mm) {
    rep.notes.push_back("shape mismatch");
    return rep;
  }
  double scale = std::max({norm1(m.r), norm1(m.theta_f), norm1(m.t) * norm1(m.s), 1.0});
  rep.residual_st = rel(m.s * m.t - m.r, scale);
  rep.residual_ts = rel(m.t * m.s - m.theta_f, scale);
  rep.residual_intertwine_t = rel(m.t * m.r - m.theta_f * m.t, scale * std::max(1.0, norm1(m.t)));
  rep.residual_intertwine_s = rel(m.s * m.theta_f - m.r * m.s, scale * std::max(1.0, norm1(m.s)));
  rep.spectrum_mismatch =
      nonzero_spectrum_distance(m.r, m.theta_f, std::sqrt(tol) * std::max(1.0, scale));
  rep.ok = rep.residual_st <= tol && rep.residual_ts <= tol &&
           rep.residual_intertwine_t <= tol && rep.residual_intertwine_s <= tol &&
           rep.spectrum_mismatch <= std::sqrt(tol) * std::max(1.0, scale);
  if (!rep.ok && rep.residual_st > tol) rep.notes.push_back("s*t != r");
  if (!rep.ok && rep.residual_ts > tol) rep.notes.push_back("t*s != theta_f");
  return rep;
}

LocalModel canonical_from_residue(const Matrix& r, CanonicalKind kind, double tol) {
  if (r.rows() != r.cols()) throw std::invalid_argument("square residue required");
  const Index n = r.rows();
  LocalModel out;
  out.r = r;
  switch (kind) {
    case CanonicalKind::Meromorphic:
      out.t = r;
      out.s = eye(n);
      out.theta_f = r;
      return out;
    case CanonicalKind::Torsion:
      out.t = eye(n);
      out.s = r;
      out.theta_f = r;
      return out;
    case CanonicalKind::Minimal: {
      Index rank = rank_by_svd(r, tol);
      Eigen::JacobiSVD<Matrix> svd(r, Eigen::ComputeThinU);
      Matrix basis = svd.matrixU().leftCols(rank);
      fix_column_phases(basis);
      out.s = basis;                 // inclusion of the image
      out.t = basis.adjoint() * r;   // corestriction
      out.theta_f = out.t * out.s;
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

ReducedModule reduce(const LocalModel& m) {
  ReducedModule rm;
  rm.n = m.n();
  rm.m = m.m();
  Eigen::Map<const Vector> vs(m.s.data(), rm.n * rm.m);
  Eigen::Map<const Vector> vt(m.t.data(), rm.m * rm.n);
  rm.u = vs * vt.transpose();
  return rm;
}

Matrix ReducedModule::mu0() const {
  Matrix out = Matrix::Zero(n, n);  // (s t)(i, l) = sum_j u[i + n j, j + m l]
  for (Index i = 0; i < n; ++i)
    for (Index l = 0; l < n; ++l)
      for (Index j = 0; j < m; ++j) out(i, l) += u(i + n * j, j + m * l);
  return out;
}

Matrix ReducedModule::mu1() const {
  Matrix out = Matrix::Zero(m, m);  // (t s)(k, j) = sum_i u[i + n j, k + m i]
  for (Index k = 0; k < m; ++k)
    for (Index j = 0; j < m; ++j)
      for (Index i = 0; i < n; ++i) out(k, j) += u(i + n * j, k + m * i);
  return out;
}

double max_minor(const ReducedModule& rm) {
  double worst = 0.0;
  const Matrix& u = rm.u;
  for (Index a = 0; a < u.rows(); ++a)
    for (Index c = a + 1; c < u.rows(); ++c)
      for (Index b = 0; b < u.cols(); ++b)
        for (Index d = b + 1; d < u.cols(); ++d)
          worst = std::max(worst, std::abs(u(a, b) * u(c, d) - u(a, d) * u(c, b)));
  return worst;
}

std::optional<LocalModel> factor(const ReducedModule& rm, double tol) {
  LocalModel out;
  const Index n = rm.n, m = rm.m;
  if (rm.u.rows() != n * m || rm.u.cols() != m * n)
    throw std::invalid_argument("reduced module shape mismatch");
  double scale = std::max(1.0, norm1(rm.u));
  if (norm1(rm.u) <= tol * scale || rm.u.size() == 0) {
    out.s = Matrix::Zero(n, m);
    out.t = Matrix::Zero(m, n);
    out.r = Matrix::Zero(n, n);
    out.theta_f = Matrix::Zero(m, m);
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(rm.u, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() > 1 && sv(1) > tol * std::max(1.0, sv(0)))
    return std::nullopt;  // a 2x2 minor survives: not decomposable
  Vector vs = svd.matrixU().col(0) * sv(0);
  Vector vt = svd.matrixV().col(0).conjugate();
  // Gauge: first nonzero entry of vec(t) becomes 1.
  Complex lambda(0, 0);
  for (Index i = 0; i < vt.rows(); ++i)
    if (std::abs(vt(i)) > tol) { lambda = vt(i); break; }
  if (lambda == Complex(0, 0)) lambda = Complex(1, 0);
  vt /= lambda;
  vs *= lambda;
  out.s = Eigen::Map<const Matrix>(vs.data(), n, m);
  out.t = Eigen::Map<const Matrix>(vt.data(), m, n);
  out.r = out.s * out.t;
  out.theta_f = out.t * out.s;
  return out;
}

IsoResult isomorphic(const LocalModel& a, const LocalModel& b, double tol,
                     uint64_t seed) {
  if (a.n() != b.n() || a.m() != b.m())
    throw std::invalid_argument("isomorphic: dimension mismatch");
  const Index n = a.n(), m = a.m();
  IsoResult res;

  // Conjugation invariants: an isomorphism preserves all four ranks.
  double rank_tol = std::max(tol, 1e-10);
  if (rank_by_svd(a.t, rank_tol) != rank_by_svd(b.t, rank_tol) ||
      rank_by_svd(a.s, rank_tol) != rank_by_svd(b.s, rank_tol) ||
      rank_by_svd(a.r, rank_tol) != rank_by_svd(b.r, rank_tol) ||
      rank_by_svd(a.theta_f, rank_tol) != rank_by_svd(b.theta_f, rank_tol))
    return res;

  const Index ne = n * n, nf = m * m;
  const Index rows = n * n + m * m + m * n + n * m;
  Matrix sys = Matrix::Zero(rows, ne + nf);
  Index row = 0;
  auto ge_idx = [&](Index p, Index q) { return p + n * q; };       // column-major
  auto gf_idx = [&](Index p, Index q) { return ne + p + m * q; };

  // g_e a.r - b.r g_e = 0
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j, ++row)
      for (Index k = 0; k < n; ++k) {
        sys(row, ge_idx(i, k)) += a.r(k, j);
        sys(row, ge_idx(k, j)) -= b.r(i, k);
      }
  // g_f a.theta - b.theta g_f = 0
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j, ++row)
      for (Index k = 0; k < m; ++k) {
        sys(row, gf_idx(i, k)) += a.theta_f(k, j);
        sys(row, gf_idx(k, j)) -= b.theta_f(i, k);
      }
  // g_f a.t - b.t g_e = 0   (m x n block)
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j, ++row) {
      for (Index k = 0; k < m; ++k) sys(row, gf_idx(i, k)) += a.t(k, j);
      for (Index k = 0; k < n; ++k) sys(row, ge_idx(k, j)) -= b.t(i, k);
    }
  // g_e a.s - b.s g_f = 0   (n x m block)
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j, ++row) {
      for (Index k = 0; k < n; ++k) sys(row, ge_idx(i, k)) += a.s(k, j);
      for (Index k = 0; k < m; ++k) sys(row, gf_idx(k, j)) -= b.s(i, k);
    }

  Eigen::JacobiSVD<Matrix> svd(sys, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  double top = sv.size() ? std::max(sv(0), 1.0) : 1.0;
  std::vector<Index> null_cols;
  for (Index i = 0; i < ne + nf; ++i)
    if (i >= sv.size() || sv(i) <= std::max(tol, 1e-10) * top) null_cols.push_back(i);
  if (null_cols.empty()) return res;

  Matrix basis(ne + nf, Index(null_cols.size()));
  for (size_t c = 0; c < null_cols.size(); ++c)
    basis.col(Index(c)) = svd.matrixV().col(null_cols[c]);

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto unpack = [&](const Vector& x) {
    IsomorphismWitness w;
    w.g_e = Matrix(n, n);
    w.g_f = Matrix(m, m);
    for (Index q = 0; q < n; ++q)
      for (Index p = 0; p < n; ++p) w.g_e(p, q) = x(ge_idx(p, q));
    for (Index q = 0; q < m; ++q)
      for (Index p = 0; p < m; ++p) w.g_f(p, q) = x(gf_idx(p, q));
    return w;
  };

  const int attempts = 32;
  for (int it = 0; it < attempts + int(basis.cols()); ++it) {
    Vector x;
    if (it < basis.cols()) {
      x = basis.col(it);
    } else {
      Vector coef(basis.cols());
      for (Index i = 0; i < coef.size(); ++i) coef(i) = Complex(gauss(rng), gauss(rng));
      x = basis * coef;
    }
    IsomorphismWitness w = unpack(x);
    if (!invertible_enough(w.g_e) || !invertible_enough(w.g_f)) continue;
    // The kernel construction already enforces the relations; re-check to
    // guard against a loose SVD threshold.
    double scale = std::max(1.0, norm1(w.g_e) + norm1(w.g_f));
    bool good = norm1(w.g_e * a.r - b.r * w.g_e) <= 1e-7 * scale * std::max(1.0, norm1(a.r)) &&
                norm1(w.g_f * a.t - b.t * w.g_e) <= 1e-7 * scale * std::max(1.0, norm1(a.t) + 1) &&
                norm1(w.g_e * a.s - b.s * w.g_f) <= 1e-7 * scale * std::max(1.0, norm1(a.s) + 1) &&
                norm1(w.g_f * a.theta_f - b.theta_f * w.g_f) <= 1e-7 * scale * std::max(1.0, norm1(a.theta_f));
    if (!good) continue;
    res.witness = std::move(w);
    return res;
  }
  res.exhausted_search = true;
  return res;
}

}  // namespace rhkit
