// ---------------------------------------------------------------------------
// Local models: validation, canonical constructions from a residue, the
// reduced tensor, its factorization, and the isomorphism search.
// ---------------------------------------------------------------------------

#include <doctest.h>
#include <rhkit/generators.hpp>
#include <rhkit/local_model.hpp>
#include <rhkit/matfun.hpp>

#include "helpers.hpp"

using namespace rhkit;
using testutil::diag;
using testutil::mat;
using testutil::max_abs_diff;
using testutil::near;

namespace {

LocalModel build(const Matrix& r, const Matrix& theta, const Matrix& t,
                 const Matrix& s) {
  LocalModel m;
  m.r = r;
  m.theta_f = theta;
  m.t = t;
  m.s = s;
  return m;
}

}  // namespace

TEST_CASE("validate accepts hand-built models and reports violations") {
  LocalModel good1 =
      build(mat({{0.5}}), mat({{0.5}}), mat({{1.0}}), mat({{0.5}}));
  CHECK(validate(good1).ok);

  LocalModel good2 = build(diag({0.0, 1.0}), mat({{1.0}}),
                           mat({{0.0, 1.0}}), mat({{0.0}, {1.0}}));
  CHECK(validate(good2).ok);

  LocalModel bad = build(mat({{1.0}}), mat({{0.0}}), mat({{1.0}}),
                         mat({{1.0}}));
  ValidationReport rep = validate(bad);
  CHECK_FALSE(rep.ok);
  CHECK(rep.residual_ts == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("canonical models from a residue") {
  LocalModel mero = canonical_from_residue(mat({{0.0}}),
                                           CanonicalKind::Meromorphic);
  CHECK(max_abs_diff(mero.t, mat({{0.0}})) == 0.0);
  CHECK(max_abs_diff(mero.s, mat({{1.0}})) == 0.0);
  CHECK(max_abs_diff(mero.theta_f, mat({{0.0}})) == 0.0);
  CHECK(validate(mero).ok);

  LocalModel tors = canonical_from_residue(mat({{2.0}}), CanonicalKind::Torsion);
  CHECK(max_abs_diff(tors.t, mat({{1.0}})) == 0.0);
  CHECK(max_abs_diff(tors.s, mat({{2.0}})) == 0.0);
  CHECK(max_abs_diff(tors.theta_f, mat({{2.0}})) == 0.0);
  CHECK(validate(tors).ok);

  // Minimal model of diag(0, 3): the auxiliary space is the image of r.
  LocalModel mini =
      canonical_from_residue(diag({0.0, 3.0}), CanonicalKind::Minimal);
  CHECK(mini.m() == 1);
  CHECK(near(mini.theta_f, mat({{3.0}}), 1e-12));
  CHECK(validate(mini).ok);
  CHECK(near(mini.s * mini.t, diag({0.0, 3.0}), 1e-12));

  for (std::uint64_t seed : {3u, 4u}) {
    Matrix r = random_matrix(3, 3, seed);
    for (CanonicalKind kind : {CanonicalKind::Meromorphic,
                               CanonicalKind::Torsion, CanonicalKind::Minimal})
      CHECK(validate(canonical_from_residue(r, kind)).ok);
  }
}

TEST_CASE("random models validate and intertwine") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Index n = 1 + Index(seed % 4), m = 1 + Index((seed / 2) % 4);
    LocalModel mo = random_model(n, m, seed);
    ValidationReport rep = validate(mo);
    CHECK(rep.ok);
    CHECK(rep.residual_st < 1e-12);
    CHECK(rep.residual_ts < 1e-12);

    // Power-series intertwining through any entire function.
    Matrix lhs = mo.t * apply_entire(mo.s * mo.t, EntireKind::PhiM2Pi);
    Matrix rhs = apply_entire(mo.t * mo.s, EntireKind::PhiM2Pi) * mo.t;
    CHECK(near(lhs, rhs, 1e-9));
  }
}

TEST_CASE("nonzero spectra of the two products agree") {
  for (std::uint64_t seed : {5u, 6u, 7u}) {
    LocalModel mo = random_model(4, 2, seed);
    // Characteristic polynomials differ by z^(n-m) exactly.
    auto ce = testutil::charpoly_coeffs(mo.r);
    auto cf = testutil::charpoly_coeffs(mo.theta_f);
    // ce should equal cf shifted by two zero roots: compare cf * z^2.
    REQUIRE(ce.size() == cf.size() + 2);
    for (size_t i = 0; i < cf.size(); ++i)
      CHECK(std::abs(ce[i] - cf[i]) < 1e-9);
    for (size_t i = cf.size(); i < ce.size(); ++i)
      CHECK(std::abs(ce[i]) < 1e-9);
  }
}

TEST_CASE("reduced tensor and contractions") {
  LocalModel m1 =
      build(mat({{0.5}}), mat({{0.5}}), mat({{1.0}}), mat({{0.5}}));
  ReducedModule rm = reduce(m1);
  CHECK(near(rm.mu0(), m1.r, 1e-12));
  CHECK(near(rm.mu1(), m1.theta_f, 1e-12));
  CHECK(max_minor(rm) < 1e-14);

  LocalModel m2 = build(diag({0.0, 1.0}), mat({{1.0}}), mat({{0.0, 1.0}}),
                        mat({{0.0}, {1.0}}));
  ReducedModule rm2 = reduce(m2);
  CHECK(near(rm2.mu0(), m2.r, 1e-12));
  CHECK(near(rm2.mu1(), m2.theta_f, 1e-12));
  CHECK(max_minor(rm2) < 1e-14);

  LocalModel zero = build(Matrix::Zero(2, 2), Matrix::Zero(1, 1),
                          Matrix::Zero(1, 2), Matrix::Zero(2, 1));
  CHECK(norm1(reduce(zero).u) == 0.0);
}

TEST_CASE("factor recovers linkage maps up to the scalar gauge") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    LocalModel m0 = random_model(3, 2, seed);
    ReducedModule rm = reduce(m0);
    auto back = factor(rm);
    REQUIRE(back.has_value());
    CHECK(near(back->s * back->t, m0.r, 1e-9));
    CHECK(near(back->t * back->s, m0.theta_f, 1e-9));
    // Gauge freedom: vec(s') vec(t')^T must reproduce the tensor itself.
    CHECK(near(reduce(*back).u, rm.u, 1e-9));
  }

  // Zero tensor: factors are not recoverable.
  LocalModel zero;
  zero.r = Matrix::Zero(2, 2);
  zero.theta_f = Matrix::Zero(2, 2);
  zero.t = Matrix::Zero(2, 2);
  zero.s = Matrix::Zero(2, 2);
  CHECK_FALSE(factor(reduce(zero)).has_value());

  // Non-decomposable tensor: a rank-2 u is rejected.
  ReducedModule broken = reduce(random_model(2, 2, 14));
  broken.u(0, 0) += 1.0;  // bump one entry to create a nonzero 2x2 minor
  if (max_minor(broken) > 1e-3) CHECK_FALSE(factor(broken).has_value());
}

TEST_CASE("isomorphism search") {
  LocalModel m0 = random_model(3, 2, 21);
  IsoResult self = isomorphic(m0, m0);
  REQUIRE(self.witness.has_value());

  // Conjugated model: a witness must exist and intertwine everything.
  Matrix ge = random_matrix(3, 3, 22) + 3.0 * eye(3);
  Matrix gf = random_matrix(2, 2, 23) + 3.0 * eye(2);
  LocalModel m1;
  m1.r = ge.inverse() * m0.r * ge;
  m1.theta_f = gf.inverse() * m0.theta_f * gf;
  m1.t = gf.inverse() * m0.t * ge;
  m1.s = ge.inverse() * m0.s * gf;
  IsoResult conj = isomorphic(m0, m1);
  REQUIRE(conj.witness.has_value());
  const auto& w = *conj.witness;
  CHECK(near(w.g_e * m0.r, m1.r * w.g_e, 1e-8));
  CHECK(near(w.g_f * m0.t, m1.t * w.g_e, 1e-8));
  CHECK(near(w.g_e * m0.s, m1.s * w.g_f, 1e-8));

  // Rank obstruction: meromorphic vs torsion model of the zero residue.
  LocalModel a = canonical_from_residue(mat({{0.0}}), CanonicalKind::Meromorphic);
  LocalModel b = canonical_from_residue(mat({{0.0}}), CanonicalKind::Torsion);
  CHECK_FALSE(isomorphic(a, b).witness.has_value());
}
