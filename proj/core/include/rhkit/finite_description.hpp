// ---------------------------------------------------------------------------
// finite_description.hpp
//
// Finite descriptions of the objects produced by the correspondence on a
// punctured surface: a surface-group representation together with, at each
// puncture, a local triple (tau_f, c, v) satisfying the gluing identities
//
//   v_a * c_a        = rho(c_a) - id
//   c_a * v_a        = tau_f[a] - id
//   c_a * rho(c_a)   = tau_f[a] * c_a
//   v_a * tau_f[a]   = rho(c_a) * v_a
//
// and the surface relation  prod [rho(a_i), rho(b_i)] * prod rho(c_a) = id.
//
// Alongside validation this module provides the isomorphism test, generated
// subobjects (spin), composition series / Jordan-Hoelder factors, the induced
// S-equivalence test, and one-parameter degenerations toward the associated
// graded of a filtration.  Rank decisions can run in exact rational
// arithmetic or in floating point with explicit tolerances.
// ---------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rhkit/rh_local.hpp"
#include "rhkit/types.hpp"

namespace rhkit {

enum class ScalarMode { Exact, Numeric };

// One puncture's local data: tau_f is m_a x m_a, c is m_a x n, v is n x m_a,
// where n is the representation dimension.
struct Puncture {
  Matrix tau_f;
  Matrix c;
  Matrix v;
};

struct FiniteDescription {
  Index genus = 0;
  std::map<std::string, Matrix> rho;  // keyed by generator label
  std::vector<Puncture> punctures;

  Index dim() const;            // representation dimension n
  Index puncture_count() const; // k
  Index total_dim() const;      // n + sum of puncture dims
};

// Generator labels in canonical order: a1,b1,...,ag,bg,c1,...,ck.
std::vector<std::string> surface_generator_labels(Index genus, Index k);

struct FDValidation {
  bool ok = false;
  double relation_residual = 0.0;   // surface relation
  double invariant_residual = 0.0;  // worst gluing identity across punctures
  std::vector<std::string> errors;
};

FDValidation validate_fd(const FiniteDescription& fd,
                         double tol = kDefaultTol);

// Change of basis by g on the representation space and g_a on each puncture
// space: rho -> g^-1 rho g, tau_f -> g_a^-1 tau_f g_a, c -> g_a^-1 c g,
// v -> g^-1 v g_a.
FiniteDescription act(const FiniteDescription& fd, const Matrix& g,
                      const std::vector<Matrix>& g_a);

// A vector in the total space, split by component: e plus one entry per
// puncture.  Zero-size blocks are allowed and mean the zero vector there.
struct FDVector {
  Vector e;
  std::vector<Vector> f;
};

// A subobject, recorded as column bases of the invariant subspaces (one per
// component, possibly with zero columns).
struct SubObject {
  Matrix e_basis;
  std::vector<Matrix> f_bases;
  std::vector<std::string> warnings;  // numeric-mode ambiguity notes

  Index total_dim() const;
};

// Smallest subobject containing the given seed vectors.
SubObject spin(const FiniteDescription& fd, const std::vector<FDVector>& seeds,
               ScalarMode mode = ScalarMode::Exact, double tol = kDefaultTol);

enum class JHStatus { Certified, Unresolved };

struct JordanHolderResult {
  std::vector<FiniteDescription> factors;  // repeated per multiplicity
  std::vector<SubObject> filtration;       // proper intermediate steps
  JHStatus status = JHStatus::Certified;
  std::vector<std::string> notes;
};

// Composition series.  Simplicity of the leaves is certified against a fixed
// seed battery (standard basis vectors, seeded random vectors, and
// eigenvector probes of random algebra elements); in numeric mode borderline
// rank decisions downgrade the status to Unresolved.
JordanHolderResult jordan_holder(const FiniteDescription& fd,
                                 ScalarMode mode = ScalarMode::Exact,
                                 double tol = kDefaultTol,
                                 std::uint64_t seed = 1,
                                 Index dim_bound = 12);

struct FDWitness {
  Matrix g;
  std::vector<Matrix> g_a;
};

// Isomorphism of finite descriptions: solves the intertwiner equations and
// searches the solution space for an invertible witness.
std::optional<FDWitness> fd_isomorphic(const FiniteDescription& x,
                                       const FiniteDescription& y,
                                       ScalarMode mode = ScalarMode::Exact,
                                       double tol = kDefaultTol,
                                       std::uint64_t seed = 1);

// Same Jordan-Hoelder factor multisets.  nullopt when either side's
// composition series came back Unresolved.
std::optional<bool> s_equivalent(const FiniteDescription& x,
                                 const FiniteDescription& y,
                                 ScalarMode mode = ScalarMode::Exact,
                                 double tol = kDefaultTol,
                                 std::uint64_t seed = 1);

// One-parameter family degenerating fd toward the associated graded of the
// given invariant filtration (each step a SubObject, strictly increasing,
// not including the full object).  tau = 1 returns fd itself; tau != 0 gives
// an isomorphic description; tau = 0 gives the associated graded.
FiniteDescription degenerate_family(const FiniteDescription& fd,
                                    const std::vector<SubObject>& filtration,
                                    const Complex& tau,
                                    double tol = kDefaultTol);

FiniteDescription direct_sum(const FiniteDescription& x,
                             const FiniteDescription& y);

// Finite description on the two-punctured sphere attached to a fiber-level
// model: rho(c1) is the monodromy of the model, rho(c2) its inverse, the
// first puncture carries the model's data and the second a complementary
// triple making the gluing identities hold.
FiniteDescription fd_from_local(const LocalRHData& d);

}  // namespace rhkit
