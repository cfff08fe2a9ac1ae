// ---------------------------------------------------------------------------
// filtration.hpp
//
// Filtration combinatorics for local models: flags of subspaces, jump graphs
// of a linear map between two flags, compatibility of a pair of jump graphs,
// the exact polygonal-line weight construction that certifies compatibility,
// graded degenerations of a filtered model, and the curve-level slope check
// on decorated flags.
// ---------------------------------------------------------------------------

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rhkit/local_model.hpp"
#include "rhkit/rational.hpp"
#include "rhkit/types.hpp"

namespace rhkit {

// Slope decoration of a flag step: an abstract (rank, degree) pair standing
// in for curve-level numerical data.  rank must be positive when present.
struct StepSlope {
  Index rank = 0;
  Rational degree;
};

// Increasing flag 0 = F_0 < F_1 < ... < F_l = ambient.  The zero step is
// implicit; `steps` lists bases (columns) of F_1..F_l, strictly increasing,
// with the last step spanning the ambient space.  `decorations` is either
// empty or has one entry per step.
struct Flag {
  Index dim = 0;
  std::vector<Matrix> steps;
  std::vector<std::optional<StepSlope>> decorations;

  Index length() const { return Index(steps.size()); }
};

struct FlagCheck {
  bool ok = false;
  std::string reason;
};

FlagCheck check_flag(const Flag& f, double tol = kDefaultTol);

// Non-decreasing step function index -> value recording when the image of a
// growing flag first lands inside each step of a target flag.  `jumps` lists
// the (index, value) pairs where the value strictly rises.
struct JumpGraph {
  std::vector<Index> points;
  std::vector<std::pair<Index, Index>> jumps;
  std::vector<std::string> warnings;
};

// Builds a jump graph directly from its plateau values (index 0 first);
// derives the jump list.  Used for combinatorial inputs without any maps.
JumpGraph jump_graph_from_points(std::vector<Index> points);

// points[j] = smallest k such that map(F_j(from)) lies in F_k(to) within
// tol.  points[0] = 0 by convention (the zero subspace maps into the zero
// subspace).  Containment decisions whose residual falls in (tol, 10*tol)
// are recorded as warnings.
JumpGraph jump_graph(const Matrix& map, const Flag& from, const Flag& to,
                     double tol = kDefaultTol);

// Compatibility of a pair of staircases drawn in one (j, k) grid.  gs is
// read as j -> k with region {k <= gs(j)}; gt is read as k -> j with region
// {j <= gt(k)}.  Compatible means every shared cell other than the origin is
// a jump point of both graphs.
bool compatible(const JumpGraph& gs, const JumpGraph& gt);

// Exact weight pair certifying compatibility: strictly increasing rational
// p (on j = 0..J) and q (on k = 0..K) such that p(j) = q(k) exactly on a
// positive-slope polygonal line through (0,0) and all jumps of gs, with
// p(j) < q(k) strictly above the line and p(j) > q(k) strictly below.
// Returns nothing exactly when no such line keeps every jump of gt on or
// above it.  The sign contract is re-verified exhaustively on the grid
// before returning.
struct PolygonalWeights {
  std::vector<Rational> p, q;
};

std::optional<PolygonalWeights> polygonal_weights(const JumpGraph& gs,
                                                  const JumpGraph& gt);

// Associated graded of a model filtered by a pair of flags: in adapted bases
// (step index = weight), only the weight-preserving blocks of r, theta_f, t,
// s survive.  Requires r/theta_f to preserve the flags and t/s to be
// filtered for the index pairing; otherwise throws std::invalid_argument.
LocalModel graded(const LocalModel& m, const Flag& flag_e, const Flag& flag_f,
                  double tol = kDefaultTol);

// One-parameter degeneration: conjugation of the model by the weight
// scaling tau^(step index) in adapted bases.  At tau = 1 this is the model
// itself, at tau != 0 an isomorphic model, and at tau = 0 (entrywise limit)
// the graded model.
LocalModel deform(const LocalModel& m, const Flag& flag_e, const Flag& flag_f,
                  Complex tau, double tol = kDefaultTol);

// True iff all decorated steps (including the ambient, i.e. the last step)
// have equal slope degree/rank.  Every step must carry a decoration.
bool slope_special_check(const Flag& flag);

}  // namespace rhkit
