#include "rhkit/filtration.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace rhkit {

namespace {

// Orthonormal column basis of a (possibly rank-deficient) matrix.
Matrix orthonormal_basis(const Matrix& a, double tol) {
  if (a.cols() == 0) return Matrix(a.rows(), 0);
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  qr.setThreshold(std::max(tol, 1e-12));
  Index r = qr.rank();
  Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), r);
  return q;
}

double containment_residual(const Vector& v, const Matrix& onb) {
  double nv = v.norm();
  if (nv == 0.0) return 0.0;
  Vector rest = v;
  if (onb.cols() > 0) rest -= onb * (onb.adjoint() * v);
  return rest.norm() / std::max(1.0, nv);
}

std::vector<std::pair<Index, Index>> derive_jumps(
    const std::vector<Index>& points) {
  std::vector<std::pair<Index, Index>> jumps;
  for (size_t i = 1; i < points.size(); ++i)
    if (points[i] > points[i - 1]) jumps.emplace_back(Index(i), points[i]);
  return jumps;
}

// Orthonormal basis adapted to a flag: columns grouped by the step in which
// they first appear, with that step index as weight.
struct AdaptedBasis {
  Matrix basis;               // dim x dim unitary
  std::vector<Index> weight;  // per column, 1-based step index
};

AdaptedBasis adapt(const Flag& f, double tol) {
  FlagCheck chk = check_flag(f, tol);
  if (!chk.ok) throw std::invalid_argument("flag invalid: " + chk.reason);
  AdaptedBasis ab;
  ab.basis = Matrix(f.dim, 0);
  for (Index i = 0; i < f.length(); ++i) {
    const Matrix& step = f.steps[i];
    Matrix rest = step;
    if (ab.basis.cols() > 0)
      rest -= ab.basis * (ab.basis.adjoint() * step);
    Matrix add = orthonormal_basis(rest, tol);
    Matrix next(f.dim, ab.basis.cols() + add.cols());
    next << ab.basis, add;
    ab.basis = std::move(next);
    for (Index c = 0; c < add.cols(); ++c) ab.weight.push_back(i + 1);
  }
  if (ab.basis.cols() != f.dim)
    throw std::invalid_argument("flag invalid: adapted basis incomplete");
  return ab;
}

// Largest entry magnitude in positions where the weight pairing says the
// entry must vanish (row weight from wr, column weight from wc).
double misfiled_mass(const Matrix& a, const std::vector<Index>& wr,
                     const std::vector<Index>& wc) {
  double worst = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      if (wr[size_t(i)] > wc[size_t(j)])
        worst = std::max(worst, std::abs(a(i, j)));
  return worst;
}

Matrix keep_equal_weight(const Matrix& a, const std::vector<Index>& wr,
                         const std::vector<Index>& wc) {
  Matrix out = Matrix::Zero(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      if (wr[size_t(i)] == wc[size_t(j)]) out(i, j) = a(i, j);
  return out;
}

struct AdaptedModel {
  AdaptedBasis e, f;
  Matrix r, theta, t, s;  // model expressed in the adapted bases
};

AdaptedModel to_adapted(const LocalModel& m, const Flag& flag_e,
                        const Flag& flag_f, double tol) {
  if (flag_e.dim != m.n() || flag_f.dim != m.m())
    throw std::invalid_argument("flag dimensions do not match the model");
  AdaptedModel am;
  am.e = adapt(flag_e, tol);
  am.f = adapt(flag_f, tol);
  am.r = am.e.basis.adjoint() * m.r * am.e.basis;
  am.theta = am.f.basis.adjoint() * m.theta_f * am.f.basis;
  am.t = am.f.basis.adjoint() * m.t * am.e.basis;
  am.s = am.e.basis.adjoint() * m.s * am.f.basis;

  double scale = std::max({1.0, norm1(m.r), norm1(m.theta_f), norm1(m.t),
                           norm1(m.s)});
  double bound = std::max(tol, 1e-12) * scale;
  if (misfiled_mass(am.r, am.e.weight, am.e.weight) > bound)
    throw std::invalid_argument("flag on E is not preserved by r");
  if (misfiled_mass(am.theta, am.f.weight, am.f.weight) > bound)
    throw std::invalid_argument("flag on F is not preserved by theta_f");
  if (misfiled_mass(am.t, am.f.weight, am.e.weight) > bound)
    throw std::invalid_argument("t is not filtered for the index pairing");
  if (misfiled_mass(am.s, am.e.weight, am.f.weight) > bound)
    throw std::invalid_argument("s is not filtered for the index pairing");
  return am;
}

}  // namespace

FlagCheck check_flag(const Flag& f, double tol) {
  FlagCheck chk;
  if (f.dim < 0) {
    chk.reason = "negative ambient dimension";
    return chk;
  }
  if (f.steps.empty()) {
    chk.reason = "flag needs at least the ambient step";
    return chk;
  }
  if (!f.decorations.empty() && Index(f.decorations.size()) != f.length()) {
    chk.reason = "decoration count differs from step count";
    return chk;
  }
  Index prev_rank = -1;
  Matrix prev_onb(f.dim, 0);
  for (size_t i = 0; i < f.steps.size(); ++i) {
    const Matrix& step = f.steps[i];
    if (step.rows() != f.dim) {
      chk.reason = "step " + std::to_string(i + 1) + " has wrong row count";
      return chk;
    }
    Matrix onb = orthonormal_basis(step, tol);
    if (onb.cols() != step.cols()) {
      chk.reason = "step " + std::to_string(i + 1) + " columns are dependent";
      return chk;
    }
    if (i > 0) {
      if (step.cols() <= prev_rank) {
        chk.reason = "step " + std::to_string(i + 1) + " does not grow";
        return chk;
      }
      for (Index c = 0; c < prev_onb.cols(); ++c)
        if (containment_residual(prev_onb.col(c), onb) > 10 * tol) {
          chk.reason = "step " + std::to_string(i) +
                       " is not contained in step " + std::to_string(i + 1);
          return chk;
        }
    }
    prev_rank = step.cols();
    prev_onb = std::move(onb);
  }
  if (prev_rank != f.dim) {
    chk.reason = "last step does not span the ambient space";
    return chk;
  }
  chk.ok = true;
  return chk;
}

JumpGraph jump_graph_from_points(std::vector<Index> points) {
  if (points.empty()) throw std::invalid_argument("jump graph needs points");
  for (size_t i = 0; i < points.size(); ++i) {
    if (points[i] < 0)
      throw std::invalid_argument("jump graph values must be nonnegative");
    if (i > 0 && points[i] < points[i - 1])
      throw std::invalid_argument("jump graph must be non-decreasing");
  }
  JumpGraph g;
  g.points = std::move(points);
  g.jumps = derive_jumps(g.points);
  return g;
}

JumpGraph jump_graph(const Matrix& map, const Flag& from, const Flag& to,
                     double tol) {
  if (map.cols() != from.dim || map.rows() != to.dim)
    throw std::invalid_argument("map shape does not match the flags");
  FlagCheck ca = check_flag(from, tol), cb = check_flag(to, tol);
  if (!ca.ok) throw std::invalid_argument("source flag invalid: " + ca.reason);
  if (!cb.ok) throw std::invalid_argument("target flag invalid: " + cb.reason);

  std::vector<Matrix> to_onb;
  to_onb.reserve(to.steps.size());
  for (const Matrix& step : to.steps)
    to_onb.push_back(orthonormal_basis(step, tol));

  JumpGraph g;
  g.points.assign(size_t(from.length()) + 1, 0);
  for (Index j = 1; j <= from.length(); ++j) {
    Matrix img = map * from.steps[size_t(j - 1)];
    Index k = 0;
    for (; k <= to.length(); ++k) {
      double worst = 0.0;
      for (Index c = 0; c < img.cols(); ++c) {
        double res;
        if (k == 0) {
          double nv = img.col(c).norm();
          res = nv / std::max(1.0, nv);
        } else {
          res = containment_residual(img.col(c), to_onb[size_t(k - 1)]);
        }
        worst = std::max(worst, res);
      }
      if (worst <= tol) break;
      if (worst <= 10 * tol) {
        std::ostringstream os;
        os << "ambiguous containment at (j=" << j << ", k=" << k
           << "): residual " << worst;
        g.warnings.push_back(os.str());
      }
    }
    if (k > to.length())
      throw std::logic_error("jump_graph: image escapes the ambient space");
    g.points[size_t(j)] = std::max(k, g.points[size_t(j - 1)]);
  }
  g.jumps = derive_jumps(g.points);
  return g;
}

bool compatible(const JumpGraph& gs, const JumpGraph& gt) {
  if (gs.points.empty() || gt.points.empty())
    throw std::invalid_argument("empty jump graph");
  const Index big_j = Index(gs.points.size()) - 1;
  const Index big_k = Index(gt.points.size()) - 1;
  for (Index v : gs.points)
    if (v > big_k) throw std::invalid_argument("gs values exceed gt range");
  for (Index v : gt.points)
    if (v > big_j) throw std::invalid_argument("gt values exceed gs range");

  std::set<std::pair<Index, Index>> s_jumps(
      derive_jumps(gs.points).begin(), derive_jumps(gs.points).end());
  std::set<std::pair<Index, Index>> t_jumps(
      derive_jumps(gt.points).begin(), derive_jumps(gt.points).end());

  for (Index j = 0; j <= big_j; ++j)
    for (Index k = 0; k <= big_k; ++k) {
      if (k > gs.points[size_t(j)] || j > gt.points[size_t(k)]) continue;
      if (j == 0 && k == 0) continue;
      if (!s_jumps.count({j, k}) || !t_jumps.count({k, j})) return false;
    }
  return true;
}

std::optional<PolygonalWeights> polygonal_weights(const JumpGraph& gs,
                                                  const JumpGraph& gt) {
  if (gs.points.empty() || gt.points.empty())
    throw std::invalid_argument("empty jump graph");
  const Index big_j = Index(gs.points.size()) - 1;
  const Index big_k = Index(gt.points.size()) - 1;
  for (Index v : gs.points)
    if (v > big_k) throw std::invalid_argument("gs values exceed gt range");
  for (Index v : gt.points)
    if (v > big_j) throw std::invalid_argument("gt values exceed gs range");

  // Mandatory vertices: origin plus the jumps of gs, as (j, k) plane points.
  std::vector<std::pair<Index, Index>> mandatory{{0, 0}};
  for (const auto& jmp : derive_jumps(gs.points)) mandatory.push_back(jmp);

  // Feasibility: every jump of gt, as plane point (value, index), must be
  // attainable on or above a positive-slope line through the mandatory
  // points.
  for (const auto& jmp : derive_jumps(gt.points)) {
    Index x = jmp.second, y = jmp.first;
    size_t a = 0;
    while (a + 1 < mandatory.size() && mandatory[a + 1].first <= x) ++a;
    if (mandatory[a].first == x) {
      if (y < mandatory[a].second) return std::nullopt;
    } else {
      if (y < mandatory[a].second + 1) return std::nullopt;
    }
  }

  // Concrete line: between consecutive mandatory points insert a bend that
  // hugs the lower-left corner, then extend past the grid so both weight
  // functions are defined everywhere.
  std::vector<std::pair<Rational, Rational>> verts;
  verts.emplace_back(0, 0);
  for (size_t a = 1; a < mandatory.size(); ++a) {
    Rational x1(mandatory[a].first), y1(mandatory[a].second);
    Rational y0(mandatory[a - 1].second);
    verts.emplace_back(x1 - Rational(1, 2), y0 + Rational(1, 2));
    verts.emplace_back(x1, y1);
  }
  {
    Rational yr = verts.back().second;
    Rational ymax = Rational(std::max(big_k, mandatory.back().second)) + 1;
    verts.emplace_back(Rational(big_j) + Rational(1, 2), yr + Rational(1, 2));
    verts.emplace_back(Rational(big_j) + 1, ymax);
  }

  // Arc-length style parameter: each segment contributes dx*dy, so that
  // p(j) = phi + dy*(j - x0) and q(k) = phi + dx*(k - y0) agree exactly on
  // the segment.
  std::vector<Rational> phi(verts.size(), Rational(0));
  for (size_t i = 1; i < verts.size(); ++i) {
    Rational dx = verts[i].first - verts[i - 1].first;
    Rational dy = verts[i].second - verts[i - 1].second;
    if (dx <= 0 || dy <= 0)
      throw std::logic_error("polygonal_weights: degenerate segment");
    phi[i] = phi[i - 1] + dx * dy;
  }

  auto p_at = [&](Rational x) {
    for (size_t i = 1; i < verts.size(); ++i)
      if (x <= verts[i].first) {
        Rational dy = verts[i].second - verts[i - 1].second;
        return phi[i - 1] + dy * (x - verts[i - 1].first);
      }
    throw std::logic_error("polygonal_weights: x out of range");
  };
  auto q_at = [&](Rational y) {
    for (size_t i = 1; i < verts.size(); ++i)
      if (y <= verts[i].second) {
        Rational dx = verts[i].first - verts[i - 1].first;
        return phi[i - 1] + dx * (y - verts[i - 1].second);
      }
    throw std::logic_error("polygonal_weights: y out of range");
  };
  auto line_at = [&](Rational x) {
    for (size_t i = 1; i < verts.size(); ++i)
      if (x <= verts[i].first) {
        Rational dx = verts[i].first - verts[i - 1].first;
        Rational dy = verts[i].second - verts[i - 1].second;
        return verts[i - 1].second + dy * (x - verts[i - 1].first) / dx;
      }
    throw std::logic_error("polygonal_weights: x out of range");
  };

  PolygonalWeights w;
  for (Index j = 0; j <= big_j; ++j) w.p.push_back(p_at(Rational(j)));
  for (Index k = 0; k <= big_k; ++k) w.q.push_back(q_at(Rational(k)));

  // Exhaustive re-verification of the sign contract on the grid.
  for (Index j = 0; j <= big_j; ++j) {
    Rational lj = line_at(Rational(j));
    for (Index k = 0; k <= big_k; ++k) {
      Rational diff = w.p[size_t(j)] - w.q[size_t(k)];
      Rational pos = lj - Rational(k);
      bool same_sign = (diff == 0 && pos == 0) || (diff > 0 && pos > 0) ||
                       (diff < 0 && pos < 0);
      if (!same_sign)
        throw std::logic_error("polygonal_weights: sign contract violated");
    }
  }
  for (const auto& jmp : derive_jumps(gs.points))
    if (w.p[size_t(jmp.first)] != w.q[size_t(jmp.second)])
      throw std::logic_error("polygonal_weights: line misses a gs jump");
  for (const auto& jmp : derive_jumps(gt.points))
    if (w.p[size_t(jmp.second)] > w.q[size_t(jmp.first)])
      throw std::logic_error("polygonal_weights: gt jump below the line");
  return w;
}

LocalModel graded(const LocalModel& m, const Flag& flag_e, const Flag& flag_f,
                  double tol) {
  AdaptedModel am = to_adapted(m, flag_e, flag_f, tol);
  LocalModel out;
  out.r = am.e.basis * keep_equal_weight(am.r, am.e.weight, am.e.weight) *
          am.e.basis.adjoint();
  out.theta_f = am.f.basis *
                keep_equal_weight(am.theta, am.f.weight, am.f.weight) *
                am.f.basis.adjoint();
  out.t = am.f.basis * keep_equal_weight(am.t, am.f.weight, am.e.weight) *
          am.e.basis.adjoint();
  out.s = am.e.basis * keep_equal_weight(am.s, am.e.weight, am.f.weight) *
          am.f.basis.adjoint();
  return out;
}

LocalModel deform(const LocalModel& m, const Flag& flag_e, const Flag& flag_f,
                  Complex tau, double tol) {
  if (tau == Complex(0, 0)) return graded(m, flag_e, flag_f, tol);
  AdaptedModel am = to_adapted(m, flag_e, flag_f, tol);

  auto scaled = [&](const AdaptedBasis& ab, bool inverse) {
    Vector d(Index(ab.weight.size()));
    for (size_t i = 0; i < ab.weight.size(); ++i) {
      Complex v = std::pow(tau, double(ab.weight[i]));
      d(Index(i)) = inverse ? Complex(1, 0) / v : v;
    }
    return Matrix(ab.basis * d.asDiagonal() * ab.basis.adjoint());
  };
  Matrix ge = scaled(am.e, false), ge_inv = scaled(am.e, true);
  Matrix hf = scaled(am.f, false), hf_inv = scaled(am.f, true);

  LocalModel out;
  out.r = ge_inv * m.r * ge;
  out.theta_f = hf_inv * m.theta_f * hf;
  out.t = hf_inv * m.t * ge;
  out.s = ge_inv * m.s * hf;
  return out;
}

bool slope_special_check(const Flag& flag) {
  if (flag.steps.empty())
    throw std::invalid_argument("flag needs at least the ambient step");
  if (flag.decorations.size() != flag.steps.size())
    throw std::invalid_argument("every step needs a slope decoration");
  std::optional<Rational> num;
  std::optional<Rational> den;
  for (const auto& dec : flag.decorations) {
    if (!dec) throw std::invalid_argument("missing slope decoration");
    if (dec->rank <= 0)
      throw std::invalid_argument("slope decoration needs positive rank");
    if (!num) {
      num = dec->degree;
      den = Rational(dec->rank);
    } else if (dec->degree * *den != *num * Rational(dec->rank)) {
      return false;
    }
  }
  return true;
}

}  // namespace rhkit
