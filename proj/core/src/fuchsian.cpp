// ---------------------------------------------------------------------------
// fuchsian.cpp
//
// Parallel transport for systems with simple poles, canonical loop baskets,
// monodromy with diagnostics, and the exact assembly of a finite
// description through series-expanded local frames at the punctures.
// ---------------------------------------------------------------------------

#include "rhkit/fuchsian.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "rhkit/matfun.hpp"
#include "rhkit/rh_local.hpp"

namespace rhkit {

namespace {

void validate_system(const FuchsianSystem& sys, const char* where) {
  const size_t k = sys.punctures.size();
  if (k == 0)
    throw std::invalid_argument(std::string(where) + ": no punctures");
  if (sys.residues.size() != k)
    throw std::invalid_argument(std::string(where) +
                                ": need one residue per puncture");
  const Index n = sys.dim();
  for (const Matrix& a : sys.residues)
    if (a.rows() != n || a.cols() != n)
      throw std::invalid_argument(std::string(where) +
                                  ": residues must be square and equisized");
  for (size_t a = 0; a < k; ++a)
    for (size_t b = a + 1; b < k; ++b)
      if (std::abs(sys.punctures[a] - sys.punctures[b]) == 0.0)
        throw std::invalid_argument(std::string(where) +
                                    ": punctures must be distinct");
  for (size_t a = 0; a < k; ++a)
    if (std::abs(sys.base - sys.punctures[a]) == 0.0)
      throw std::invalid_argument(std::string(where) +
                                  ": base point sits on a puncture");
}

Matrix coefficient_at(const FuchsianSystem& sys, Complex z) {
  const Index n = sys.dim();
  Matrix f = Matrix::Zero(n, n);
  for (size_t a = 0; a < sys.punctures.size(); ++a)
    f -= sys.residues[a] / (z - sys.punctures[a]);
  return f;
}

// One polyline segment with the Dormand-Prince 5(4) embedded pair; the
// segment is parametrized on [0, 1] so the underflow threshold is relative
// to the segment length.
Matrix dopri_segment(const FuchsianSystem& sys, Complex z0, Complex z1,
                     Matrix y, double tol) {
  const Complex dz = z1 - z0;
  auto f = [&](double t, const Matrix& yy) -> Matrix {
    return dz * (coefficient_at(sys, z0 + t * dz) * yy);
  };

  double t = 0.0, h = 0.1;
  Matrix k1 = f(t, y);
  long steps = 0;
  while (t < 1.0) {
    if (++steps > 200000)
      throw std::runtime_error("transport: step limit exceeded");
    const double hs = std::min(h, 1.0 - t);
    Matrix k2 = f(t + hs / 5.0, y + hs * (k1 / 5.0));
    Matrix k3 = f(t + 3.0 * hs / 10.0,
                  y + hs * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
    Matrix k4 =
        f(t + 4.0 * hs / 5.0,
          y + hs * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
    Matrix k5 = f(t + 8.0 * hs / 9.0,
                  y + hs * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 +
                            64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4));
    Matrix k6 = f(t + hs,
                  y + hs * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 +
                            46732.0 / 5247.0 * k3 + 49.0 / 176.0 * k4 -
                            5103.0 / 18656.0 * k5));
    Matrix y5 = y + hs * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 +
                          125.0 / 192.0 * k4 - 2187.0 / 6784.0 * k5 +
                          11.0 / 84.0 * k6);
    Matrix k7 = f(t + hs, y5);
    Matrix err = hs * (71.0 / 57600.0 * k1 - 71.0 / 16695.0 * k3 +
                       71.0 / 1920.0 * k4 - 17253.0 / 339200.0 * k5 +
                       22.0 / 525.0 * k6 - 1.0 / 40.0 * k7);
    const double sc = tol * std::max(1.0, norm1(y5));
    const double en = norm1(err);
    const bool accept = en <= sc && std::isfinite(en);
    if (accept) {
      t += hs;
      y = std::move(y5);
      k1 = std::move(k7);
    }
    double fac = 0.9 * std::pow(sc / std::max(en, 1e-300), 0.2);
    if (!std::isfinite(fac)) fac = 0.2;
    h = hs * std::clamp(fac, 0.2, 5.0);
    if (h < 1e-12 && t < 1.0) {
      std::ostringstream os;
      os << "transport: step size underflow near z = " << (z0 + t * dz);
      throw std::runtime_error(os.str());
    }
  }
  return y;
}

double segment_distance(Complex a, Complex b, Complex p) {
  const Complex ab = b - a;
  const double l2 = std::norm(ab);
  if (l2 == 0.0) return std::abs(p - a);
  double t = ((std::conj(ab) * (p - a)).real()) / l2;
  t = std::clamp(t, 0.0, 1.0);
  return std::abs(p - (a + t * ab));
}

std::vector<Complex> poly_from_roots(const Vector& roots) {
  std::vector<Complex> c{Complex(1, 0)};
  for (Index i = 0; i < roots.size(); ++i) {
    std::vector<Complex> next(c.size() + 1, Complex(0, 0));
    for (size_t j = 0; j < c.size(); ++j) {
      next[j + 1] += c[j];
      next[j] -= roots(i) * c[j];
    }
    c = std::move(next);
  }
  return c;
}

double charpoly_gap(const Matrix& x, const Matrix& y) {
  Eigen::ComplexEigenSolver<Matrix> ex(x, false), ey(y, false);
  std::vector<Complex> cx = poly_from_roots(ex.eigenvalues());
  std::vector<Complex> cy = poly_from_roots(ey.eigenvalues());
  double d = 0.0;
  for (size_t i = 0; i < cx.size(); ++i) d = std::max(d, std::abs(cx[i] - cy[i]));
  return d;
}

double residue_scale(const FuchsianSystem& sys) {
  double s = 1.0;
  for (const Matrix& a : sys.residues) s = std::max(s, norm1(a));
  return s;
}

bool residues_closed(const FuchsianSystem& sys, double tol) {
  Matrix sum = Matrix::Zero(sys.dim(), sys.dim());
  for (const Matrix& a : sys.residues) sum += a;
  return norm1(sum) <= std::max(tol, 1e-12) * residue_scale(sys);
}

// Local fundamental frame L(w) = H(w) (w - p_a)^(-A_a) evaluated at w, with
// H from the recurrence A H_j - H_j (A - j id) = - sum_{l+m=j-1} B_l H_m,
// B_l the Taylor coefficients at p_a of the regular part of the system.
Matrix local_frame(const FuchsianSystem& sys, size_t a, Complex w) {
  const Matrix& big_a = sys.residues[a];
  const Complex pa = sys.punctures[a];
  const Index n = big_a.rows();
  const Complex u = w - pa;
  const double r = std::abs(u);

  std::vector<Matrix> h{eye(n)};
  std::vector<Matrix> b;
  Matrix hsum = eye(n);
  Complex upow(1, 0);
  for (Index j = 1;; ++j) {
    if (j > 200)
      throw std::runtime_error(
          "assemble_fd: local frame series did not converge");
    while (Index(b.size()) < j) {
      const Index l = Index(b.size());
      Matrix bl = Matrix::Zero(n, n);
      for (size_t other = 0; other < sys.punctures.size(); ++other) {
        if (other == a) continue;
        Complex denom = std::pow(pa - sys.punctures[other], double(l + 1));
        bl += sys.residues[other] * ((l % 2 ? -1.0 : 1.0) / denom);
      }
      b.push_back(bl);
    }
    Matrix rhs = Matrix::Zero(n, n);
    for (Index l = 0; l < j; ++l) rhs -= b[size_t(l)] * h[size_t(j - 1 - l)];
    Matrix hj = sylvester(big_a, big_a - double(j) * eye(n), rhs);
    h.push_back(hj);
    upow *= u;
    hsum += hj * upow;
    if (norm1(hj) * std::pow(r, double(j)) <=
        1e-16 * std::max(1.0, norm1(hsum)))
      break;
  }

  Matrix expo = apply_entire(Matrix(-Complex(std::log(r), std::arg(u)) * big_a),
                             EntireKind::ExpPlain);
  return hsum * expo;
}

}  // namespace

Matrix transport(const FuchsianSystem& sys,
                 const std::vector<Complex>& polyline, double tol) {
  validate_system(sys, "transport");
  if (polyline.empty())
    throw std::invalid_argument("transport: empty polyline");
  for (Complex pt : polyline)
    for (Complex p : sys.punctures)
      if (std::abs(pt - p) <= 1e-14 * (1.0 + std::abs(p)))
        throw std::invalid_argument("transport: polyline touches a puncture");

  Matrix y = eye(sys.dim());
  for (size_t i = 0; i + 1 < polyline.size(); ++i) {
    const Complex z0 = polyline[i], z1 = polyline[i + 1];
    if (std::abs(z1 - z0) <= 1e-14 * (1.0 + std::abs(z0))) continue;
    y = dopri_segment(sys, z0, z1, std::move(y), tol);
  }
  return y;
}

LoopBasket default_basket(const FuchsianSystem& sys) {
  validate_system(sys, "default_basket");
  const size_t k = sys.punctures.size();

  double dmin = std::numeric_limits<double>::infinity();
  for (size_t a = 0; a < k; ++a) {
    dmin = std::min(dmin, std::abs(sys.base - sys.punctures[a]));
    for (size_t b = a + 1; b < k; ++b)
      dmin = std::min(dmin, std::abs(sys.punctures[a] - sys.punctures[b]));
  }
  const double radius = 0.25 * dmin;

  LoopBasket basket;
  basket.order.resize(k);
  for (size_t j = 0; j < k; ++j) basket.order[j] = Index(j);
  std::sort(basket.order.begin(), basket.order.end(), [&](Index x, Index y) {
    const Complex px = sys.punctures[size_t(x)], py = sys.punctures[size_t(y)];
    if (px.real() != py.real()) return px.real() < py.real();
    return px.imag() < py.imag();
  });

  for (size_t j = 0; j < k; ++j) {
    const size_t a = size_t(basket.order[j]);
    const Complex pa = sys.punctures[a];
    const Complex start = pa - Complex(0, radius);
    PunctureLoop loop;
    loop.puncture = Index(a);
    loop.radius = radius;
    loop.approach = {sys.base, Complex(pa.real(), sys.base.imag()), start};
    const int sides = 24;
    for (int s = 0; s < sides; ++s) {
      double phi = -kPi / 2.0 + 2.0 * kPi * double(s) / double(sides);
      loop.circle.push_back(pa + radius * Complex(std::cos(phi), std::sin(phi)));
    }
    loop.circle.push_back(start);  // close the polygon exactly
    basket.loops.push_back(std::move(loop));
  }

  double clearance = std::numeric_limits<double>::infinity();
  for (const PunctureLoop& loop : basket.loops) {
    auto scan = [&](const std::vector<Complex>& path) {
      for (size_t i = 0; i + 1 < path.size(); ++i)
        for (size_t b = 0; b < k; ++b) {
          if (Index(b) == loop.puncture) continue;
          clearance = std::min(
              clearance, segment_distance(path[i], path[i + 1],
                                          sys.punctures[b]));
        }
    };
    scan(loop.approach);
    scan(loop.circle);
  }
  basket.clearance = clearance;
  return basket;
}

MonodromyResult monodromy(const FuchsianSystem& sys, double tol) {
  MonodromyResult result;
  result.basket = default_basket(sys);
  result.closed = residues_closed(sys, tol);

  for (const PunctureLoop& loop : result.basket.loops) {
    Matrix t_app = transport(sys, loop.approach, tol);
    Matrix t_circ = transport(sys, loop.circle, tol);
    Eigen::FullPivLU<Matrix> lu(t_app);
    if (!lu.isInvertible())
      throw std::runtime_error("monodromy: approach transport is singular");
    Matrix m = lu.solve(t_circ * t_app);
    result.charpoly_distance.push_back(charpoly_gap(
        m, apply_entire(sys.residues[size_t(loop.puncture)],
                        EntireKind::ExpM2Pi)));
    result.loops.push_back(std::move(m));
  }

  Matrix rel = eye(sys.dim());
  for (const Matrix& m : result.loops) rel = rel * m;
  result.relation_residual = norm1(rel - eye(sys.dim())) /
                             std::max(1.0, norm1(rel));
  if (result.closed &&
      result.relation_residual > std::max(1e-4, 1000.0 * tol)) {
    std::ostringstream os;
    os << "monodromy: relation residual " << result.relation_residual
       << " exceeds tolerance (basket clearance " << result.basket.clearance
       << "); try a larger tol or better separated punctures";
    throw std::runtime_error(os.str());
  }
  return result;
}

FiniteDescription assemble_fd(const FuchsianSystem& sys,
                              const std::vector<LocalModel>& models,
                              double tol) {
  validate_system(sys, "assemble_fd");
  const size_t k = sys.punctures.size();
  if (models.size() != k)
    throw std::invalid_argument("assemble_fd: need one local model per puncture");
  if (!residues_closed(sys, tol))
    throw std::invalid_argument("assemble_fd: residues must sum to zero");
  const double scale = residue_scale(sys);
  for (size_t a = 0; a < k; ++a) {
    if (models[a].r.rows() != sys.dim() ||
        norm1(models[a].r - sys.residues[a]) > std::max(tol, 1e-8) * scale)
      throw std::invalid_argument(
          "assemble_fd: model residue mismatch at puncture " +
          std::to_string(a));
    if (!resonance_report(sys.residues[a], default_cluster_tol(sys.residues[a]))
             .good())
      throw std::invalid_argument(
          "assemble_fd: resonant residue at puncture " + std::to_string(a) +
          "; shear the model first");
  }

  LoopBasket basket = default_basket(sys);
  FiniteDescription fd;
  fd.genus = 0;
  for (size_t j = 0; j < k; ++j) {
    const PunctureLoop& loop = basket.loops[j];
    const size_t a = size_t(loop.puncture);
    Matrix t_app = transport(sys, loop.approach, tol);
    Matrix l = local_frame(sys, a, loop.approach.back());
    Eigen::FullPivLU<Matrix> lul(l);
    if (!lul.isInvertible())
      throw std::runtime_error("assemble_fd: local frame is singular");
    Matrix p = lul.solve(t_app);
    Eigen::FullPivLU<Matrix> lup(p);
    if (!lup.isInvertible())
      throw std::runtime_error("assemble_fd: frame matching is singular");

    Matrix mono = lup.solve(
        apply_entire(sys.residues[a], EntireKind::ExpM2Pi) * p);
    LocalRHData d = rh_local(models[a]);
    fd.rho["c" + std::to_string(j + 1)] = mono;
    fd.punctures.push_back({d.t_f, d.c * p, lup.solve(d.v)});
  }

  Matrix rel = eye(sys.dim());
  for (size_t j = 0; j < k; ++j) rel = rel * fd.rho.at("c" + std::to_string(j + 1));
  const double residual = norm1(rel - eye(sys.dim())) / std::max(1.0, norm1(rel));
  if (residual > std::max(1e-4, 1000.0 * tol)) {
    std::ostringstream os;
    os << "assemble_fd: relation residual " << residual
       << " exceeds tolerance (basket clearance " << basket.clearance << ")";
    throw std::runtime_error(os.str());
  }
  return fd;
}

}  // namespace rhkit
