#pragma once

#include <optional>
#include <vector>

#include "rhkit/local_model.hpp"
#include "rhkit/matfun.hpp"
#include "rhkit/types.hpp"

namespace rhkit {

// Topological side of the local correspondence: the two monodromies and
// the linking maps c : E -> F, v : F -> E with v c = t_e - id and
// c v = t_f - id.
struct LocalRHData {
  Matrix t_e;  // n x n, invertible
  Matrix t_f;  // m x m, invertible
  Matrix c;    // m x n
  Matrix v;    // n x m
};

struct RHDataValidation {
  bool ok = false;
  double residual_vc = 0.0;       // || v c - (t_e - id) ||
  double residual_cv = 0.0;       // || c v - (t_f - id) ||
  double residual_equiv_c = 0.0;  // || c t_e - t_f c ||
  double residual_equiv_v = 0.0;  // || v t_f - t_e v ||
  bool invertible_te = false;
  bool invertible_tf = false;
};

RHDataValidation validate_rh_data(const LocalRHData& d, double tol = kDefaultTol);

// Forward direction: t_e = exp(-2 pi i r), t_f = exp(-2 pi i theta_f),
// c = t * phi(r), v = s, with phi the entire function PhiM2Pi.
LocalRHData rh_local(const LocalModel& m);

struct InvRHReport {
  // || exp(-2 pi i theta_f) - t_f || relative; small for consistent data.
  double tf_consistency = 0.0;
  double phi_r_condition = 0.0;  // condition estimate of phi(r)
};

// Inverse direction for a branch section whose strip contains 0 as its
// only integer: r = branch_log(t_e), t = c phi(r)^{-1}, s = v,
// theta_f = t s.  Throws std::invalid_argument for an unusable section,
// std::runtime_error when phi(r) is numerically singular.
LocalModel inv_rh_local(const LocalRHData& d, const BranchSection& section,
                        double tol = kDefaultTol, InvRHReport* report = nullptr);

struct TangentPair {
  Matrix a;  // n x m, variation of s
  Matrix b;  // m x n, variation of t
};

struct RigidityResult {
  Matrix da;  // = a
  Matrix db;  // = b * phi_plain(s t)
  double tangency_residual = 0.0;
};

// Differential of (s, t) -> (s, t * f(s t)) with f(z) = (e^z - 1)/z, at the
// model's (s, t), applied to a tangent pair satisfying a t + s b = 0 and
// t a + b s = 0.  Throws when the tangency residual exceeds tol.
RigidityResult rigidity_differential(const LocalModel& m, const Matrix& a,
                                     const Matrix& b, double tol = kDefaultTol);

// Basis of the tangent space cut out by the two tangency equations.
std::vector<TangentPair> tangent_basis(const LocalModel& m,
                                       double tol = kDefaultTol);

// Numeric-rank check that the differential is injective on the tangent
// space at the model.
bool rigidity_injective(const LocalModel& m, double tol = kDefaultTol);

}  // namespace rhkit
