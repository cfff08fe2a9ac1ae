// ---------------------------------------------------------------------------
// generators.hpp
//
// Seeded random instances for tests and the command line: plain models,
// models with spectrum in the standard strip, resonant models with integer
// eigenvalue gaps, closed pole systems, and filtration bundles.  The same
// seed always reproduces the same instance.
// ---------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <vector>

#include "rhkit/fuchsian.hpp"
#include "rhkit/json_io.hpp"
#include "rhkit/local_model.hpp"
#include "rhkit/types.hpp"

namespace rhkit {

// Complex Gaussian entries, unit variance.
Matrix random_matrix(Index rows, Index cols, std::uint64_t seed);

// Random linkage maps s, t scaled so that || s t || is of order one; r and
// theta_f are the two products, so the instance is valid by construction.
LocalModel random_model(Index n, Index m, std::uint64_t seed);

// Model whose r-spectrum lies well inside the strip Re in [0, 1): the
// min(n, m) controlled eigenvalues have real part in [0.05, 0.8] and
// imaginary part in [-0.4, 0.4]; the remaining |n - m| eigenvalues are 0.
LocalModel random_strip_model(Index n, Index m, std::uint64_t seed);

// Model with real r-spectrum containing at least one pair at an exact
// integer distance in 1..max_gap.  Requires min(n, m) >= 2.
LocalModel random_resonant_model(Index n, Index m, std::uint64_t seed,
                                 int max_gap = 3);

// k simple poles with residues summing to zero, none resonant, punctures
// spread along the real axis and the base point well below them.
FuchsianSystem random_fuchsian(Index k, Index n, std::uint64_t seed);

// Flag made of leading-coordinate subspaces with the given step dimensions;
// the last entry must equal dim.
Flag coordinate_flag(Index dim, const std::vector<Index>& step_dims);

// Random model plus random coordinate flags on both sides.
StabilityBundle random_stability_bundle(Index n, Index m, std::uint64_t seed);

}  // namespace rhkit
