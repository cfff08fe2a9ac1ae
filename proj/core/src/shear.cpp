#include "rhkit/shear.hpp"

#include <Eigen/LU>
#include <cmath>
#include <stdexcept>

namespace rhkit {

namespace {

struct ClusterSelection {
  Matrix projector;
  Index multiplicity = 0;
};

double match_tol(const Matrix& a, double tol) {
  return std::max(tol, 1e-8) * tol_scale(a);
}

// Sum of spectral projectors of all clusters whose center lies within
// matching distance of alpha.
ClusterSelection select_cluster(const Matrix& a, Complex alpha, double tol) {
  ClusterSelection sel;
  sel.projector = Matrix::Zero(a.rows(), a.cols());
  SpectralSplit split = spectral_split(a, default_cluster_tol(a));
  const double mt = match_tol(a, tol);
  for (const SpectralCluster& c : split.clusters) {
    if (std::abs(c.center - alpha) <= mt) {
      sel.projector += c.projector;
      sel.multiplicity += c.multiplicity;
    }
  }
  return sel;
}

ShearResult shift_impl(const LocalModel& m, Complex alpha, double tol,
                       ShiftDirection dir) {
  if (std::abs(alpha) <= match_tol(m.r, tol))
    throw std::invalid_argument("shear: cannot shift the zero eigenvalue");
  ClusterSelection pe = select_cluster(m.r, alpha, tol);
  ClusterSelection qf = select_cluster(m.theta_f, alpha, tol);
  if (pe.multiplicity == 0)
    throw std::invalid_argument("shear: alpha is not an eigenvalue of r");
  if (pe.multiplicity != qf.multiplicity)
    throw std::invalid_argument(
        "shear: eigenvalue multiplicities of r and theta_f disagree at alpha");

  const Matrix& p = pe.projector;
  const Matrix& q = qf.projector;
  const Index mm = m.m();
  Matrix id_m = eye(mm);

  // M agrees with theta_f on the alpha cluster and with the identity on its
  // complement; inverting it realizes theta_f^{-1} restricted to the cluster.
  Matrix big_m = m.theta_f * q + (id_m - q);
  Eigen::FullPivLU<Matrix> lu(big_m);
  if (!lu.isInvertible())
    throw std::runtime_error("shear: cluster restriction is singular");
  Matrix minv_q = lu.solve(q);

  ShearResult res;
  res.p = p;
  res.q = q;
  if (dir == ShiftDirection::Down) {
    res.model.r = m.r - p;
    res.model.theta_f = m.theta_f - q;
    res.model.t = m.t;
    res.model.s = m.s * ((id_m - q) + (m.theta_f - id_m) * minv_q);
  } else {
    res.model.r = m.r + p;
    res.model.theta_f = m.theta_f + q;
    res.model.s = m.s;
    res.model.t = ((id_m - q) + (m.theta_f + id_m) * minv_q) * m.t;
  }
  return res;
}

}  // namespace

Index zero_multiplicity(const Matrix& a, double tol) {
  Index mult = 0;
  SpectralSplit split = spectral_split(a, default_cluster_tol(a));
  const double mt = match_tol(a, tol);
  for (const SpectralCluster& c : split.clusters)
    if (std::abs(c.center) <= mt) mult += c.multiplicity;
  return mult;
}

ShearResult shift_down(const LocalModel& m, Complex alpha, double tol) {
  return shift_impl(m, alpha, tol, ShiftDirection::Down);
}

ShearResult shift_up(const LocalModel& m, Complex alpha, double tol) {
  return shift_impl(m, alpha, tol, ShiftDirection::Up);
}

MakeGoodResult make_good(const LocalModel& m, double tol, Index max_steps) {
  MakeGoodResult res;
  res.model = m;

  const double rt = match_tol(m.r, tol);
  ResonanceReport initial = resonance_report(res.model.r, rt);
  if (max_steps < 0) {
    Index total_gap = 0;
    for (const ResonantPair& p : initial.pairs) total_gap += p.k;
    max_steps = 32 + 8 * total_gap + 4 * m.n();
  }

  for (Index iter = 0; iter < max_steps; ++iter) {
    ResonanceReport rep = resonance_report(res.model.r, rt);
    if (rep.good()) {
      res.good = true;
      res.terminated = true;
      return res;
    }
    const ResonantPair& pair = rep.pairs.front();
    bool lo_is_zero = std::abs(pair.lo) <= rt;
    bool zero_between = false;
    for (Index j = 1; j < pair.k; ++j)
      if (std::abs(pair.lo + Complex(double(j), 0.0)) <= rt) {
        zero_between = true;
        break;
      }

    ShearStep step;
    if (lo_is_zero || zero_between) {
      step.alpha = pair.hi;
      step.direction = ShiftDirection::Down;
      res.model = shift_down(res.model, pair.hi, tol).model;
    } else {
      step.alpha = pair.lo;
      step.direction = ShiftDirection::Up;
      res.model = shift_up(res.model, pair.lo, tol).model;
    }
    step.zero_multiplicity_after = zero_multiplicity(res.model.r, tol);
    res.steps.push_back(step);
  }

  res.good = resonance_report(res.model.r, rt).good();
  res.terminated = false;
  return res;
}

}  // namespace rhkit
