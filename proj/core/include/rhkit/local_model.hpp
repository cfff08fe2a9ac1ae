#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rhkit/types.hpp"

namespace rhkit {

// Fiber data of a regular singular point: E-fiber of dimension n carrying
// the residue r, an auxiliary space of dimension m carrying theta_f, and
// linking maps t : E -> F, s : F -> E with s*t = r and t*s = theta_f.
struct LocalModel {
  Matrix r;        // n x n
  Matrix theta_f;  // m x m
  Matrix t;        // m x n
  Matrix s;        // n x m

  Index n() const { return r.rows(); }
  Index m() const { return theta_f.rows(); }
};

struct ValidationReport {
  bool ok = false;
  double residual_st = 0.0;           // || s t - r ||
  double residual_ts = 0.0;           // || t s - theta_f ||
  double residual_intertwine_t = 0.0; // || t r - theta_f t ||
  double residual_intertwine_s = 0.0; // || s theta_f - r s ||
  double spectrum_mismatch = 0.0;     // nonzero spectra of r and theta_f
  std::vector<std::string> notes;
};

// Checks shapes, the two factorization identities, the intertwining
// relations they imply, and agreement of the nonzero spectra.  Residuals
// are relative to the 1-norm scale of the inputs.
ValidationReport validate(const LocalModel& m, double tol = kDefaultTol);

enum class CanonicalKind { Meromorphic, Torsion, Minimal };

// The three standard models attached to a residue endomorphism:
//   Meromorphic: F = E,       t = r,  s = id
//   Torsion:     F = E,       t = id, s = r
//   Minimal:     F = image r, t = corestriction of r, s = inclusion
LocalModel canonical_from_residue(const Matrix& r, CanonicalKind kind,
                                  double tol = kDefaultTol);

// The rank-one tensor u = vec(s) vec(t)^T (column-major vec), together
// with the contractions that recover r and theta_f linearly from u.
struct ReducedModule {
  Matrix u;  // (n*m) x (m*n)
  Index n = 0, m = 0;

  Matrix mu0() const;  // == s t == r for decomposable u
  Matrix mu1() const;  // == t s == theta_f
};

ReducedModule reduce(const LocalModel& m);

// Largest absolute value over all 2x2 minors of u; zero iff u has rank <= 1.
double max_minor(const ReducedModule& rm);

// Factors a decomposable u back into (s, t), gauge-fixed so the first
// nonzero entry of vec(t) equals 1.  Returns nullopt when u is not
// decomposable within tol (second singular value test).
std::optional<LocalModel> factor(const ReducedModule& rm,
                                 double tol = kDefaultTol);

struct IsomorphismWitness {
  Matrix g_e;  // n x n invertible
  Matrix g_f;  // m x m invertible
};

struct IsoResult {
  std::optional<IsomorphismWitness> witness;
  // True when the intertwiner space is nonzero but the randomized search
  // for an invertible element ran out of attempts.
  bool exhausted_search = false;
};

// Searches for (g_e, g_f) with g_e r1 = r2 g_e, g_f theta1 = theta2 g_f,
// g_f t1 = t2 g_e, g_e s1 = s2 g_f, both blocks invertible.
IsoResult isomorphic(const LocalModel& a, const LocalModel& b,
                     double tol = kDefaultTol, uint64_t seed = 0);

}  // namespace rhkit
