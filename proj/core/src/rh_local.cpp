#include "rhkit/rh_local.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <stdexcept>

namespace rhkit {

namespace {

double rel(const Matrix& diff, double scale) {
  return norm1(diff) / std::max(1.0, scale);
}

bool invertible(const Matrix& a, double tol) {
  if (a.size() == 0) return true;
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& sv = svd.singularValues();
  return sv(sv.size() - 1) > std::max(tol, 1e-12) * std::max(1.0, sv(0));
}

}  // namespace

RHDataValidation validate_rh_data(const LocalRHData& d, double tol) {
  RHDataValidation rep;
  const Index n = d.t_e.rows(), m = d.t_f.rows();
  if (d.t_e.cols() != n || d.t_f.cols() != m || d.c.rows() != m ||
      d.c.cols() != n || d.v.rows() != n || d.v.cols() != m)
    return rep;
  double scale = std::max({norm1(d.t_e), norm1(d.t_f), norm1(d.c) * norm1(d.v), 1.0});
  rep.residual_vc = rel(d.v * d.c - (d.t_e - eye(n)), scale);
  rep.residual_cv = rel(d.c * d.v - (d.t_f - eye(m)), scale);
  rep.residual_equiv_c = rel(d.c * d.t_e - d.t_f * d.c, scale * std::max(1.0, norm1(d.c)));
  rep.residual_equiv_v = rel(d.v * d.t_f - d.t_e * d.v, scale * std::max(1.0, norm1(d.v)));
  rep.invertible_te = invertible(d.t_e, tol);
  rep.invertible_tf = invertible(d.t_f, tol);
  rep.ok = rep.residual_vc <= tol && rep.residual_cv <= tol &&
           rep.residual_equiv_c <= tol && rep.residual_equiv_v <= tol &&
           rep.invertible_te && rep.invertible_tf;
  return rep;
}

LocalRHData rh_local(const LocalModel& m) {
  LocalRHData d;
  d.t_e = apply_entire(m.r, EntireKind::ExpM2Pi);
  d.t_f = apply_entire(m.theta_f, EntireKind::ExpM2Pi);
  d.c = m.t * apply_entire(m.r, EntireKind::PhiM2Pi);
  d.v = m.s;
  return d;
}

LocalModel inv_rh_local(const LocalRHData& d, const BranchSection& section,
                        double tol, InvRHReport* report) {
  if (!section.zero_preferred())
    throw std::invalid_argument(
        "inv_rh_local: section strip must contain 0 as its only integer");
  const Index n = d.t_e.rows(), m = d.t_f.rows();
  if (d.t_e.cols() != n || d.t_f.cols() != m || d.c.rows() != m ||
      d.c.cols() != n || d.v.rows() != n || d.v.cols() != m)
    throw std::invalid_argument("inv_rh_local: shape mismatch");

  LocalModel out;
  out.r = branch_log(d.t_e, section, tol);
  Matrix phi_r = apply_entire(out.r, EntireKind::PhiM2Pi);

  double cond = 0.0;
  if (n > 0) {
    Eigen::JacobiSVD<Matrix> svd(phi_r);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 1e-12 * std::max(1.0, sv(0)))
      throw std::runtime_error("inv_rh_local: phi(r) numerically singular");
    cond = sv(0) / sv(sv.size() - 1);
  }
  out.t = d.c * phi_r.partialPivLu().solve(eye(n));
  out.s = d.v;
  out.theta_f = out.t * out.s;

  if (report) {
    report->phi_r_condition = cond;
    Matrix tf = apply_entire(out.theta_f, EntireKind::ExpM2Pi);
    report->tf_consistency =
        norm1(tf - d.t_f) / std::max(1.0, std::max(norm1(tf), norm1(d.t_f)));
  }
  return out;
}

RigidityResult rigidity_differential(const LocalModel& m, const Matrix& a,
                                     const Matrix& b, double tol) {
  if (a.rows() != m.n() || a.cols() != m.m() || b.rows() != m.m() ||
      b.cols() != m.n())
    throw std::invalid_argument("rigidity_differential: shape mismatch");
  double scale = std::max({1.0, norm1(a), norm1(b)}) *
                 std::max({1.0, norm1(m.s), norm1(m.t)});
  double tangency = std::max(norm1(a * m.t + m.s * b), norm1(m.t * a + b * m.s)) / scale;
  if (tangency > tol)
    throw std::invalid_argument("rigidity_differential: pair is not tangent");
  RigidityResult res;
  res.tangency_residual = tangency;
  res.da = a;
  res.db = b * apply_entire(m.s * m.t, EntireKind::PhiPlain);
  return res;
}

std::vector<TangentPair> tangent_basis(const LocalModel& m, double tol) {
  const Index n = m.n(), mm = m.m();
  const Index na = n * mm, nb = mm * n;
  Matrix sys = Matrix::Zero(n * n + mm * mm, na + nb);
  auto a_idx = [&](Index p, Index q) { return p + n * q; };        // a is n x m
  auto b_idx = [&](Index p, Index q) { return na + p + mm * q; };  // b is m x n
  Index row = 0;
  // a t + s b = 0  (n x n)
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j, ++row) {
      for (Index k = 0; k < mm; ++k) {
        sys(row, a_idx(i, k)) += m.t(k, j);
        sys(row, b_idx(k, j)) += m.s(i, k);
      }
    }
  // t a + b s = 0  (m x m)
  for (Index i = 0; i < mm; ++i)
    for (Index j = 0; j < mm; ++j, ++row) {
      for (Index k = 0; k < n; ++k) {
        sys(row, a_idx(k, j)) += m.t(i, k);
        sys(row, b_idx(i, k)) += m.s(k, j);
      }
    }
  std::vector<TangentPair> basis;
  if (na + nb == 0) return basis;
  Eigen::JacobiSVD<Matrix> svd(sys, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  double top = sv.size() ? std::max(1.0, sv(0)) : 1.0;
  for (Index i = 0; i < na + nb; ++i) {
    if (i < sv.size() && sv(i) > std::max(tol, 1e-10) * top) continue;
    Vector x = svd.matrixV().col(i);
    TangentPair tp;
    tp.a = Eigen::Map<const Matrix>(x.data(), n, mm);
    tp.b = Eigen::Map<const Matrix>(x.data() + na, mm, n);
    basis.push_back(std::move(tp));
  }
  return basis;
}

bool rigidity_injective(const LocalModel& m, double tol) {
  std::vector<TangentPair> basis = tangent_basis(m, tol);
  if (basis.empty()) return true;
  const Index n = m.n(), mm = m.m();
  Matrix image(n * mm + mm * n, Index(basis.size()));
  for (size_t i = 0; i < basis.size(); ++i) {
    RigidityResult r = rigidity_differential(m, basis[i].a, basis[i].b,
                                             std::max(tol, 1e-6));
    Vector col(n * mm + mm * n);
    col.head(n * mm) = Eigen::Map<const Vector>(r.da.data(), n * mm);
    col.tail(mm * n) = Eigen::Map<const Vector>(r.db.data(), mm * n);
    image.col(Index(i)) = col;
  }
  Eigen::JacobiSVD<Matrix> svd(image);
  const auto& sv = svd.singularValues();
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-7 * std::max(1.0, sv(0))) ++rank;
  return rank == Index(basis.size());
}

}  // namespace rhkit
