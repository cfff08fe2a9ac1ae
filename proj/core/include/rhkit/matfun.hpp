#pragma once

#include <optional>
#include <vector>

#include "rhkit/types.hpp"

namespace rhkit {

// Primary matrix functions for the four entire functions used by the
// local correspondence.  All are evaluated through one engine: complex
// Schur form, eigenvalue clustering, block reordering, and the block
// recurrence with triangular Sylvester solves; dimensions <= 2 fall back
// to a scaled Taylor evaluation on the full matrix.
enum class EntireKind {
  ExpM2Pi,   // z -> exp(-2*pi*i*z)
  PhiM2Pi,   // z -> (exp(-2*pi*i*z) - 1)/z, value -2*pi*i at z = 0
  ExpPlain,  // z -> exp(z)
  PhiPlain,  // z -> (exp(z) - 1)/z, value 1 at z = 0
};

Matrix apply_entire(const Matrix& a, EntireKind kind);

// Set-theoretic section of mu -> lambda with exp(-2*pi*i*lambda) == mu and
// Re(lambda) in the half-open strip [anchor, anchor + 1).
struct BranchSection {
  double anchor = 0.0;

  Complex value(Complex mu) const;
  bool contains(Complex lambda, double slack = 0.0) const {
    return lambda.real() >= anchor - slack && lambda.real() < anchor + 1.0 + slack;
  }
  // True when the strip contains 0, hence value(1) == 0.  Required by the
  // inverse direction of the local correspondence.
  bool zero_preferred() const { return anchor > -1.0 && anchor <= 0.0; }
};

struct SpectralCluster {
  Complex center;     // mean of the merged eigenvalue approximations
  int multiplicity;
  Matrix basis;       // n x multiplicity, spans the generalized eigenspace
  Matrix projector;   // spectral projector onto it along the other clusters
};

struct SpectralSplit {
  std::vector<SpectralCluster> clusters;
  double min_gap = 0.0;   // smallest distance between distinct cluster centers
  bool ambiguous = false; // some inter-cluster gap is below 10x the merge tol
};

// Groups eigenvalues whose mutual distance is < tol (transitive closure)
// and returns bases and projectors per cluster.
SpectralSplit spectral_split(const Matrix& a, double tol);

struct ResonantPair {
  Complex hi, lo;  // hi - lo ~ k with k a positive integer
  int k;
  int hi_mult, lo_mult;
};

struct ResonanceReport {
  std::vector<ResonantPair> pairs;
  bool good() const { return pairs.empty(); }
};

// Pairs of distinct eigenvalue clusters whose difference is a nonzero
// integer within tol.  The same tol is used to merge eigenvalues.
ResonanceReport resonance_report(const Matrix& a, double tol);

// Matrix logarithm with respect to exp(-2*pi*i * .): returns L with
// apply_entire(L, ExpM2Pi) == m and every eigenvalue of L in the strip of
// the section.  Throws std::invalid_argument when m has an eigenvalue too
// close to 0.
Matrix branch_log(const Matrix& m, const BranchSection& section,
                  double tol = kDefaultTol);

// Solves the Sylvester equation a x - x b = c (Bartels-Stewart: Schur
// forms of both sides plus triangular back-substitution).  Throws
// std::invalid_argument when spec(a) and spec(b) overlap.
Matrix sylvester(const Matrix& a, const Matrix& b, const Matrix& c);

// Clustering width used when a caller has no better scale: absolute
// eigenvalue distance relative to the matrix magnitude.
inline double default_cluster_tol(const Matrix& a) {
  return 1e-6 * tol_scale(a);
}

}  // namespace rhkit
