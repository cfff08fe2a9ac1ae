// ---------------------------------------------------------------------------
// fuchsian.hpp
//
// First-order systems with simple poles,  dy = - sum_a A_a y dz / (z - p_a),
// numerically integrated parallel transport along polylines, loop baskets
// around the punctures, monodromy with diagnostics, and the assembly of a
// finite description from the transported frames together with fiber-level
// local models at the punctures.
// ---------------------------------------------------------------------------

#pragma once

#include <vector>

#include "rhkit/finite_description.hpp"
#include "rhkit/local_model.hpp"
#include "rhkit/types.hpp"

namespace rhkit {

struct FuchsianSystem {
  Complex base;                   // base point, away from the punctures
  std::vector<Complex> punctures;
  std::vector<Matrix> residues;   // A_a, one n x n matrix per puncture

  Index dim() const { return residues.empty() ? 0 : residues.front().rows(); }
};

// Fundamental-solution transport along a polyline: returns T with
// y(end) = T y(start) for solutions of the system.  Adaptive embedded
// Runge-Kutta (Dormand-Prince 5(4)); throws std::runtime_error when the
// step size underflows, which happens when the path passes too close to a
// puncture.  Paths composing head-to-tail multiply as T(g then h) = T_h T_g.
Matrix transport(const FuchsianSystem& sys,
                 const std::vector<Complex>& polyline, double tol = 1e-10);

// One loop: an approach polyline from the base point to a start point at
// distance `radius` below the puncture, and a closed counterclockwise
// polygon (inscribed 24-gon) around it.  Transport is homotopy invariant,
// so the polygon carries the same monodromy as the circle.
struct PunctureLoop {
  Index puncture = 0;             // index into FuchsianSystem::punctures
  std::vector<Complex> approach;  // base -> start point
  std::vector<Complex> circle;    // start point -> ... -> start point
  double radius = 0.0;
};

struct LoopBasket {
  std::vector<PunctureLoop> loops;  // in relation order
  std::vector<Index> order;         // order[j] == loops[j].puncture
  double clearance = 0.0;  // min distance from any path to any foreign puncture
};

// Canonical basket: loops ordered by increasing real part of the puncture,
// L-shaped approaches through the base's horizontal line, common radius a
// quarter of the smallest pairwise distance (punctures and base).
LoopBasket default_basket(const FuchsianSystem& sys);

struct MonodromyResult {
  LoopBasket basket;
  std::vector<Matrix> loops;  // transported loop matrices, basket order
  bool closed = false;        // residues sum to zero (no pole at infinity)
  double relation_residual = 0.0;  // product of loops in relation order vs id
  // Per loop: distance between the characteristic polynomial of the
  // transported loop and that of exp(-2 pi i A_a); conjugation-invariant
  // integration check.
  std::vector<double> charpoly_distance;
};

// Transports every basket loop.  When the system is closed and the relation
// residual exceeds max(1e-4, 1000 * tol), throws std::runtime_error with
// diagnostics.
MonodromyResult monodromy(const FuchsianSystem& sys, double tol = 1e-10);

// Builds the finite description of the system on the punctured sphere: the
// loop monodromies in relation order as rho(c_j), together with each
// puncture's local model data moved into the base frame through the
// transported local frame P_a (series solution H(z) (z-p_a)^(-A_a) matched
// against the approach transport).  The gluing identities then hold exactly;
// only the surface relation carries integration error.  Requires residues
// summing to zero, non-resonant residues, and models[a].r == residues[a].
FiniteDescription assemble_fd(const FuchsianSystem& sys,
                              const std::vector<LocalModel>& models,
                              double tol = 1e-10);

}  // namespace rhkit
