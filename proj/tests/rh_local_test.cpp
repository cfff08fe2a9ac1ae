// ---------------------------------------------------------------------------
// The local correspondence: forward map, inverse map, round trips, data
// validation, and the rigidity differential.
// ---------------------------------------------------------------------------

#include <doctest.h>
#include <rhkit/generators.hpp>
#include <rhkit/rh_local.hpp>

#include <random>

#include "helpers.hpp"

using namespace rhkit;
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

TEST_CASE("forward map frozen values") {
  // Rank-one half-integer model.
  LocalModel m1 = build(mat({{0.5}}), mat({{0.5}}), mat({{1.0}}),
                        mat({{0.5}}));
  LocalRHData d1 = rh_local(m1);
  CHECK(max_abs_diff(d1.t_e, mat({{-1.0}})) < 1e-12);
  CHECK(max_abs_diff(d1.t_f, mat({{-1.0}})) < 1e-12);
  CHECK(max_abs_diff(d1.c, mat({{-4.0}})) < 1e-12);
  CHECK(max_abs_diff(d1.v, mat({{0.5}})) < 1e-12);
  CHECK(max_abs_diff(d1.v * d1.c, mat({{-2.0}})) < 1e-12);

  // Zero model: trivial monodromies, zero linkage.
  LocalModel m0 = build(mat({{0.0}}), mat({{0.0}}), mat({{0.0}}),
                        mat({{0.0}}));
  LocalRHData d0 = rh_local(m0);
  CHECK(max_abs_diff(d0.t_e, mat({{1.0}})) < 1e-12);
  CHECK(max_abs_diff(d0.c, mat({{0.0}})) < 1e-12);

  // Integer residue through the torsion model: phi kills the linkage on
  // the monodromy side even though t is the identity.
  LocalModel m2 = canonical_from_residue(mat({{2.0}}), CanonicalKind::Torsion);
  LocalRHData d2 = rh_local(m2);
  CHECK(max_abs_diff(d2.t_e, mat({{1.0}})) < 1e-10);
  CHECK(max_abs_diff(d2.c, mat({{0.0}})) < 1e-10);
  CHECK(max_abs_diff(d2.v, mat({{2.0}})) < 1e-12);
}

TEST_CASE("forward output always satisfies the data relations") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    Index n = 1 + Index(seed % 4), m = 1 + Index((seed / 3) % 4);
    LocalRHData d = rh_local(random_model(n, m, seed));
    RHDataValidation rep = validate_rh_data(d);
    CHECK(rep.ok);
    CHECK(rep.residual_vc < 1e-9);
    CHECK(rep.residual_cv < 1e-9);
  }
}

TEST_CASE("data validation rejects broken relations") {
  LocalRHData bad;
  bad.t_e = eye(1);
  bad.t_f = eye(1);
  bad.c = mat({{1.0}});
  bad.v = mat({{1.0}});
  RHDataValidation rep = validate_rh_data(bad);
  CHECK_FALSE(rep.ok);
  CHECK(rep.residual_vc > 0.1);
}

TEST_CASE("inverse map frozen values") {
  BranchSection sec{0.0};

  LocalRHData d;
  d.t_e = mat({{-1.0}});
  d.t_f = mat({{-1.0}});
  d.c = mat({{-4.0}});
  d.v = mat({{0.5}});
  LocalModel m = inv_rh_local(d, sec);
  CHECK(max_abs_diff(m.r, mat({{0.5}})) < 1e-10);
  CHECK(max_abs_diff(m.t, mat({{1.0}})) < 1e-10);
  CHECK(max_abs_diff(m.s, mat({{0.5}})) < 1e-12);
  CHECK(max_abs_diff(m.theta_f, mat({{0.5}})) < 1e-10);

  // Identity data maps to the zero model.
  LocalRHData id;
  id.t_e = eye(2);
  id.t_f = eye(2);
  id.c = Matrix::Zero(2, 2);
  id.v = Matrix::Zero(2, 2);
  LocalModel z = inv_rh_local(id, sec);
  CHECK(norm1(z.r) < 1e-10);
  CHECK(norm1(z.t) < 1e-10);

  // Pure-v data: T_E = I forces r = 0, t = 0; s carries everything.
  LocalRHData pv;
  pv.t_e = eye(1);
  pv.t_f = eye(1);
  pv.c = mat({{0.0}});
  pv.v = mat({{3.0}});
  LocalModel mv = inv_rh_local(pv, sec);
  CHECK(norm1(mv.r) < 1e-10);
  CHECK(norm1(mv.t) < 1e-10);
  CHECK(max_abs_diff(mv.s, mat({{3.0}})) < 1e-12);
  CHECK(norm1(mv.theta_f) < 1e-10);

  CHECK_THROWS_AS(inv_rh_local(d, BranchSection{0.25}), std::invalid_argument);
}

TEST_CASE("round trip: model to data to model") {
  BranchSection sec{0.0};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Index n = 1 + Index(seed % 4), m = 1 + Index((seed / 2) % 4);
    LocalModel m0 = random_strip_model(n, m, seed);
    InvRHReport rep;
    LocalModel m1 = inv_rh_local(rh_local(m0), sec, kDefaultTol, &rep);
    CHECK(near(m0.r, m1.r, 1e-7));
    CHECK(near(m0.theta_f, m1.theta_f, 1e-7));
    CHECK(near(m0.t, m1.t, 1e-7));
    CHECK(near(m0.s, m1.s, 1e-7));
    CHECK(rep.tf_consistency < 1e-7);
  }
}

TEST_CASE("round trip: data to model to data") {
  BranchSection sec{0.0};
  for (std::uint64_t seed = 31; seed <= 40; ++seed) {
    // Arbitrary valid data: spectra need not lie in any strip.
    LocalRHData d0 = rh_local(random_model(3, 2, seed));
    LocalRHData d1 = rh_local(inv_rh_local(d0, sec));
    CHECK(near(d0.t_e, d1.t_e, 1e-7));
    CHECK(near(d0.t_f, d1.t_f, 1e-7));
    CHECK(near(d0.c, d1.c, 1e-7));
    CHECK(near(d0.v, d1.v, 1e-7));
  }
}

TEST_CASE("forward map is additive on direct sums") {
  LocalModel a = random_model(2, 1, 51), b = random_model(1, 2, 52);
  LocalModel sum;
  sum.r = Matrix::Zero(3, 3);
  sum.r.topLeftCorner(2, 2) = a.r;
  sum.r.bottomRightCorner(1, 1) = b.r;
  sum.theta_f = Matrix::Zero(3, 3);
  sum.theta_f.topLeftCorner(1, 1) = a.theta_f;
  sum.theta_f.bottomRightCorner(2, 2) = b.theta_f;
  sum.t = Matrix::Zero(3, 3);
  sum.t.topLeftCorner(1, 2) = a.t;
  sum.t.bottomRightCorner(2, 1) = b.t;
  sum.s = Matrix::Zero(3, 3);
  sum.s.topLeftCorner(2, 1) = a.s;
  sum.s.bottomRightCorner(1, 2) = b.s;
  REQUIRE(validate(sum).ok);

  LocalRHData ds = rh_local(sum), da = rh_local(a), db = rh_local(b);
  CHECK(near(ds.t_e.topLeftCorner(2, 2), da.t_e, 1e-10));
  CHECK(near(ds.t_e.bottomRightCorner(1, 1), db.t_e, 1e-10));
  CHECK(norm1(Matrix(ds.t_e.topRightCorner(2, 1))) < 1e-10);
  CHECK(near(ds.c.topLeftCorner(1, 2), da.c, 1e-10));
  CHECK(near(ds.c.bottomRightCorner(2, 1), db.c, 1e-10));
}

TEST_CASE("rigidity differential matches finite differences") {
  for (std::uint64_t seed : {61u, 62u, 63u}) {
    Index n = 2 + Index(seed % 3), m = 1 + Index(seed % 3);
    LocalModel mo = random_model(n, m, seed);
    std::vector<TangentPair> basis = tangent_basis(mo);
    REQUIRE(!basis.empty());

    // Random tangent direction from the basis.
    Matrix a = Matrix::Zero(n, m), b = Matrix::Zero(m, n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    for (const TangentPair& tp : basis) {
      Complex w(g(rng), g(rng));
      a += w * tp.a;
      b += w * tp.b;
    }

    RigidityResult res = rigidity_differential(mo, a, b);
    CHECK(near(res.da, a, 1e-12));

    // Central differences of (s, t) -> t (e^{st} - 1)/(st) along (a, b).
    const double h = 1e-5;
    auto second = [&](double sign) {
      Matrix s2 = mo.s + sign * h * a;
      Matrix t2 = mo.t + sign * h * b;
      return Matrix(t2 * apply_entire(Matrix(s2 * t2), EntireKind::PhiPlain));
    };
    Matrix fd = (second(1.0) - second(-1.0)) / (2.0 * h);
    CHECK(max_abs_diff(fd, res.db) < 1e-6 * std::max(1.0, norm1(res.db)));

    CHECK(rigidity_injective(mo));
  }
}

TEST_CASE("rigidity differential rejects non-tangent directions") {
  LocalModel mo = random_model(2, 2, 71);
  Matrix a = Matrix::Identity(2, 2);  // almost surely not tangent
  Matrix b = Matrix::Zero(2, 2);
  CHECK_THROWS_AS(rigidity_differential(mo, a, b), std::invalid_argument);
}

TEST_CASE("scalar rigidity: tangency forces opposite variations") {
  // s = t = [1]: tangency reads a + b = 0, and the differential sends
  // (a, -a) to (a, -a (e - 1)).
  LocalModel mo = build(mat({{1.0}}), mat({{1.0}}), mat({{1.0}}),
                        mat({{1.0}}));
  RigidityResult res =
      rigidity_differential(mo, mat({{2.0}}), mat({{-2.0}}));
  CHECK(std::abs(res.db(0, 0) - Complex(-2.0 * (std::exp(1.0) - 1.0), 0)) <
        1e-10);
}
