// ---------------------------------------------------------------------------
// shear.hpp
//
// Elementary shearing transformations on local models.  A shear moves one
// eigenvalue cluster of the residue pair (r, theta_f) by an integer step
// while preserving both monodromies exp(-2*pi*i r) and exp(-2*pi*i theta_f)
// exactly.  Iterating shears removes integer-distance resonances between
// eigenvalues of r, steering the model toward a "good" representative whose
// eigenvalue differences are never nonzero integers.
// ---------------------------------------------------------------------------

#pragma once

#include <vector>

#include "rhkit/local_model.hpp"
#include "rhkit/matfun.hpp"

namespace rhkit {

enum class ShiftDirection { Down, Up };

// One move performed by make_good: the eigenvalue cluster that was shifted,
// the direction, and the multiplicity of the zero eigenvalue of r afterwards.
struct ShearStep {
  Complex alpha{};
  ShiftDirection direction = ShiftDirection::Down;
  Index zero_multiplicity_after = 0;
};

// Result of a single shear: the transformed model together with the spectral
// projectors that were used (p acts on the n-side, q on the m-side).
struct ShearResult {
  LocalModel model;
  Matrix p;
  Matrix q;
};

// Multiplicity of the eigenvalue cluster of `a` at zero.
Index zero_multiplicity(const Matrix& a, double tol = kDefaultTol);

// Shift the eigenvalue cluster of r at alpha down by one (alpha -> alpha-1),
// adjusting s so that the defining relations keep holding.  alpha must be a
// nonzero eigenvalue of both r and theta_f with matching multiplicity.
ShearResult shift_down(const LocalModel& m, Complex alpha,
                       double tol = kDefaultTol);

// Shift the eigenvalue cluster of r at alpha up by one (alpha -> alpha+1),
// adjusting t.  Same preconditions as shift_down.
ShearResult shift_up(const LocalModel& m, Complex alpha,
                     double tol = kDefaultTol);

struct MakeGoodResult {
  LocalModel model;
  std::vector<ShearStep> steps;
  bool good = false;        // final model has no integer resonances
  bool terminated = false;  // loop stopped on its own before the move guard
};

// Deterministic resonance-removal driver.  While some pair of eigenvalue
// clusters of r differs by a nonzero integer, pick the first pair reported
// by resonance_report (smallest gap first) and perform one shear:
//   - if the low eigenvalue is zero, shift the high cluster down;
//   - else if no intermediate value lo+j (0 < j < k) is zero, shift the low
//     cluster up;
//   - otherwise shift the high cluster down.
// Re-clusters after every move.  max_steps < 0 selects an automatic guard
// derived from the initial resonance report.
MakeGoodResult make_good(const LocalModel& m, double tol = kDefaultTol,
                         Index max_steps = -1);

}  // namespace rhkit
