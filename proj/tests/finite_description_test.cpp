// ---------------------------------------------------------------------------
// Finite descriptions: validation, the basis-change action, generated
// subobjects, composition series, S-equivalence, and degenerations.
// ---------------------------------------------------------------------------

#include <doctest.h>
#include <rhkit/finite_description.hpp>
#include <rhkit/generators.hpp>

#include <random>

#include "helpers.hpp"

using namespace rhkit;
using testutil::mat;
using testutil::max_abs_diff;
using testutil::near;

namespace {

// Rank-one description on the two-punctured sphere whose loop eigenvalue at
// the first puncture is `mu` (so the second loop carries 1/mu).
FiniteDescription rank_one_sphere(Complex mu) {
  FiniteDescription fd;
  fd.genus = 0;
  fd.rho["c1"] = mat({{mu}});
  fd.rho["c2"] = mat({{Complex(1.0, 0.0) / mu}});
  fd.punctures.push_back({mat({{mu}}), mat({{mu - 1.0}}), mat({{1.0}})});
  fd.punctures.push_back({mat({{Complex(1.0, 0.0) / mu}}),
                          mat({{Complex(1.0, 0.0) / mu - 1.0}}),
                          mat({{1.0}})});
  return fd;
}

// Genus-one description with one zero-dimensional puncture and the given
// 2x2 handle matrix (the other handle generator and the loop are trivial).
FiniteDescription handle_description(const Matrix& a) {
  FiniteDescription fd;
  fd.genus = 1;
  fd.rho["a1"] = a;
  fd.rho["b1"] = eye(2);
  fd.rho["c1"] = eye(2);
  Puncture p;
  p.tau_f = Matrix(0, 0);
  p.c = Matrix(0, 2);
  p.v = Matrix(2, 0);
  fd.punctures.push_back(p);
  return fd;
}

FDVector e_seed(Index n, Index i, Index k) {
  FDVector v;
  v.e = Vector::Zero(n);
  v.e(i) = Complex(1.0, 0.0);
  v.f.assign(size_t(k), Vector());
  return v;
}

}  // namespace

TEST_CASE("generator labels") {
  CHECK(surface_generator_labels(0, 1) == std::vector<std::string>{"c1"});
  CHECK(surface_generator_labels(1, 2) ==
        std::vector<std::string>{"a1", "b1", "c1", "c2"});
}

TEST_CASE("validation accepts mirrored local data on the sphere") {
  FiniteDescription fd;
  fd.genus = 0;
  fd.rho["c1"] = mat({{-1.0}});
  fd.rho["c2"] = mat({{-1.0}});
  fd.punctures.push_back({mat({{-1.0}}), mat({{-4.0}}), mat({{0.5}})});
  fd.punctures.push_back({mat({{-1.0}}), mat({{-4.0}}), mat({{0.5}})});
  FDValidation rep = validate_fd(fd);
  CHECK(rep.ok);
  CHECK(rep.relation_residual < 1e-12);
  CHECK(rep.invariant_residual < 1e-12);
}

TEST_CASE("validation basics and failure modes") {
  // All-identity representation with vanishing linkage.
  FiniteDescription triv;
  triv.genus = 0;
  triv.rho["c1"] = eye(2);
  triv.rho["c2"] = eye(2);
  triv.punctures.push_back({eye(1), Matrix::Zero(1, 2), Matrix::Zero(2, 1)});
  triv.punctures.push_back({eye(1), Matrix::Zero(1, 2), Matrix::Zero(2, 1)});
  CHECK(validate_fd(triv).ok);

  // Broken gluing identity: v c must reproduce rho(c) - id.
  FiniteDescription bad;
  bad.genus = 0;
  bad.rho["c1"] = eye(1);
  bad.punctures.push_back({mat({{2.0}}), mat({{1.0}}), mat({{1.0}})});
  FDValidation rep = validate_fd(bad);
  CHECK_FALSE(rep.ok);
  CHECK(rep.invariant_residual > 0.1);

  // A zero-dimensional puncture forces a trivial loop there.
  FiniteDescription zero_p;
  zero_p.genus = 0;
  zero_p.rho["c1"] = mat({{-1.0}});
  zero_p.rho["c2"] = mat({{-1.0}});
  zero_p.punctures.push_back({mat({{-1.0}}), mat({{-4.0}}), mat({{0.5}})});
  zero_p.punctures.push_back({Matrix(0, 0), Matrix(0, 1), Matrix(1, 0)});
  CHECK_FALSE(validate_fd(zero_p).ok);

  // Missing generator matrices are reported, not crashed on.
  FiniteDescription incomplete;
  incomplete.genus = 1;
  incomplete.rho["a1"] = eye(1);
  incomplete.punctures.push_back({eye(1), Matrix::Zero(1, 1),
                                  Matrix::Zero(1, 1)});
  CHECK_FALSE(validate_fd(incomplete).errors.empty());

  // Unipotent handle with an empty puncture validates.
  CHECK(validate_fd(handle_description(mat({{1.0, 1.0}, {0.0, 1.0}}))).ok);
}

TEST_CASE("basis-change action") {
  FiniteDescription fd = rank_one_sphere(Complex(2.0, 0.0));
  REQUIRE(validate_fd(fd).ok);

  // Identity action is a no-op.
  FiniteDescription same = act(fd, eye(1), {eye(1), eye(1)});
  CHECK(near(same.rho.at("c1"), fd.rho.at("c1"), 1e-14));
  CHECK(near(same.punctures[0].c, fd.punctures[0].c, 1e-14));

  // Scalars on the puncture spaces rescale the linkage maps oppositely.
  Matrix lam = mat({{3.0}});
  FiniteDescription scaled = act(fd, eye(1), {lam, eye(1)});
  CHECK(near(scaled.punctures[0].c, Matrix(fd.punctures[0].c / 3.0), 1e-14));
  CHECK(near(scaled.punctures[0].v, Matrix(fd.punctures[0].v * 3.0), 1e-14));
  CHECK(validate_fd(scaled).ok);

  // Random conjugation stays valid and is detected as isomorphic.
  FiniteDescription big = direct_sum(fd, rank_one_sphere(Complex(3.0, 0.0)));
  REQUIRE(validate_fd(big).ok);
  Matrix g = random_matrix(2, 2, 17) + 3.0 * eye(2);
  std::vector<Matrix> ga{random_matrix(2, 2, 18) + 3.0 * eye(2),
                         random_matrix(2, 2, 19) + 3.0 * eye(2)};
  FiniteDescription moved = act(big, g, ga);
  CHECK(validate_fd(moved).ok);
  auto wit = fd_isomorphic(big, moved, ScalarMode::Numeric);
  REQUIRE(wit.has_value());
  // The witness intertwines the representations: rho_moved = w^-1 rho w.
  Matrix lhs = big.rho.at("c1") * wit->g;
  Matrix rhs = wit->g * moved.rho.at("c1");
  CHECK(max_abs_diff(lhs, rhs) < 1e-7 * std::max(1.0, norm1(lhs)));

  CHECK_THROWS_AS(act(fd, Matrix::Zero(1, 1), {eye(1), eye(1)}),
                  std::invalid_argument);
  CHECK_THROWS_AS(act(fd, eye(1), {eye(1)}), std::invalid_argument);
}

TEST_CASE("generated subobjects") {
  // Zero seed spins up nothing.
  FiniteDescription triv;
  triv.genus = 0;
  triv.rho["c1"] = eye(2);
  triv.punctures.push_back({eye(1), Matrix::Zero(1, 2), Matrix::Zero(2, 1)});
  SubObject zero = spin(triv, {});
  CHECK(zero.total_dim() == 0);

  // In the identity description a basis vector generates a line.
  SubObject line = spin(triv, {e_seed(2, 0, 1)});
  CHECK(line.total_dim() == 1);
  REQUIRE(line.e_basis.cols() == 1);
  CHECK(std::abs(line.e_basis(1, 0)) < 1e-12);

  // Unipotent handle: e1 is fixed by every map, e2 generates everything.
  FiniteDescription uni = handle_description(mat({{1.0, 1.0}, {0.0, 1.0}}));
  SubObject fixed = spin(uni, {e_seed(2, 0, 1)});
  CHECK(fixed.total_dim() == 1);
  REQUIRE(fixed.e_basis.cols() == 1);
  CHECK(std::abs(fixed.e_basis(1, 0)) < 1e-12);

  SubObject full = spin(uni, {e_seed(2, 1, 1)});
  CHECK(full.total_dim() == 2);

  // Numeric mode agrees on the dimensions.
  CHECK(spin(uni, {e_seed(2, 0, 1)}, ScalarMode::Numeric).total_dim() == 1);
  CHECK(spin(uni, {e_seed(2, 1, 1)}, ScalarMode::Numeric).total_dim() == 2);
}

TEST_CASE("composition series") {
  // A rank-one description is its own series.
  FiniteDescription one = rank_one_sphere(Complex(2.0, 0.0));
  JordanHolderResult jh1 = jordan_holder(one);
  CHECK(jh1.status == JHStatus::Certified);
  REQUIRE(jh1.factors.size() == 1);
  CHECK(jh1.factors[0].dim() == 1);
  CHECK(fd_isomorphic(jh1.factors[0], one).has_value());

  // Unipotent handle: two trivial one-dimensional factors.
  FiniteDescription uni = handle_description(mat({{1.0, 1.0}, {0.0, 1.0}}));
  JordanHolderResult jh2 = jordan_holder(uni);
  CHECK(jh2.status == JHStatus::Certified);
  REQUIRE(jh2.factors.size() == 2);
  Index total = 0;
  for (const FiniteDescription& f : jh2.factors) {
    CHECK(f.dim() == 1);
    CHECK(max_abs_diff(f.rho.at("a1"), eye(1)) < 1e-9);
    total += f.total_dim();
  }
  CHECK(total == uni.total_dim());
  REQUIRE(jh2.filtration.size() == 1);
  CHECK(jh2.filtration[0].total_dim() == 1);

  // Direct sum of non-isomorphic simples returns both, dims conserved.
  FiniteDescription sum = direct_sum(rank_one_sphere(Complex(2.0, 0.0)),
                                     rank_one_sphere(Complex(3.0, 0.0)));
  REQUIRE(validate_fd(sum).ok);
  JordanHolderResult jh3 = jordan_holder(sum);
  CHECK(jh3.status == JHStatus::Certified);
  REQUIRE(jh3.factors.size() == 2);
  std::vector<double> eigs;
  Index e_total = 0, f_total = 0;
  for (const FiniteDescription& f : jh3.factors) {
    eigs.push_back(f.rho.at("c1")(0, 0).real());
    e_total += f.dim();
    for (const Puncture& p : f.punctures) f_total += p.tau_f.rows();
  }
  std::sort(eigs.begin(), eigs.end());
  CHECK(std::abs(eigs[0] - 2.0) < 1e-9);
  CHECK(std::abs(eigs[1] - 3.0) < 1e-9);
  CHECK(e_total == sum.dim());
  Index f_expected = 0;
  for (const Puncture& p : sum.punctures) f_expected += p.tau_f.rows();
  CHECK(f_total == f_expected);
}

TEST_CASE("isomorphism obstructions") {
  FiniteDescription a = rank_one_sphere(Complex(2.0, 0.0));
  CHECK(fd_isomorphic(a, a).has_value());
  CHECK_FALSE(fd_isomorphic(a, rank_one_sphere(Complex(3.0, 0.0))).has_value());

  // Same representation, different linkage ranks.
  FiniteDescription flat;
  flat.genus = 0;
  flat.rho["c1"] = eye(1);
  flat.punctures.push_back({eye(1), Matrix::Zero(1, 1), Matrix::Zero(1, 1)});
  FiniteDescription linked;
  linked.genus = 0;
  linked.rho["c1"] = eye(1);
  linked.punctures.push_back({eye(1), Matrix::Zero(1, 1), mat({{1.0}})});
  REQUIRE(validate_fd(flat).ok);
  REQUIRE(validate_fd(linked).ok);
  CHECK_FALSE(fd_isomorphic(flat, linked).has_value());
}

TEST_CASE("s-equivalence") {
  FiniteDescription uni = handle_description(mat({{1.0, 1.0}, {0.0, 1.0}}));
  FiniteDescription dia = handle_description(eye(2));

  auto eq = s_equivalent(uni, dia);
  REQUIRE(eq.has_value());
  CHECK(*eq);

  // Isomorphic descriptions are S-equivalent.
  FiniteDescription sum = direct_sum(rank_one_sphere(Complex(2.0, 0.0)),
                                     rank_one_sphere(Complex(3.0, 0.0)));
  Matrix g = random_matrix(2, 2, 7) + 3.0 * eye(2);
  FiniteDescription moved =
      act(sum, g, {eye(2), eye(2)});
  auto eq2 = s_equivalent(sum, moved);
  REQUIRE(eq2.has_value());
  CHECK(*eq2);

  // Order of summands does not matter.
  FiniteDescription swapped = direct_sum(rank_one_sphere(Complex(3.0, 0.0)),
                                         rank_one_sphere(Complex(2.0, 0.0)));
  auto eq3 = s_equivalent(sum, swapped);
  REQUIRE(eq3.has_value());
  CHECK(*eq3);

  // Different dimensions are never S-equivalent.
  auto eq4 = s_equivalent(uni, rank_one_sphere(Complex(2.0, 0.0)));
  REQUIRE(eq4.has_value());
  CHECK_FALSE(*eq4);

  // Distinct simple factors break the equivalence.
  auto eq5 = s_equivalent(sum, direct_sum(rank_one_sphere(Complex(2.0, 0.0)),
                                          rank_one_sphere(Complex(5.0, 0.0))));
  REQUIRE(eq5.has_value());
  CHECK_FALSE(*eq5);
}

TEST_CASE("degeneration toward the graded") {
  FiniteDescription uni = handle_description(mat({{1.0, 1.0}, {0.0, 1.0}}));
  SubObject sub = spin(uni, {e_seed(2, 0, 1)});
  REQUIRE(sub.total_dim() == 1);
  std::vector<SubObject> filt{sub};

  FiniteDescription at_one = degenerate_family(uni, filt, Complex(1.0, 0.0));
  CHECK(near(at_one.rho.at("a1"), uni.rho.at("a1"), 1e-14));

  FiniteDescription at_zero = degenerate_family(uni, filt, Complex(0.0, 0.0));
  CHECK(validate_fd(at_zero).ok);
  CHECK(max_abs_diff(at_zero.rho.at("a1"), eye(2)) < 1e-12);

  FiniteDescription mid = degenerate_family(uni, filt, Complex(0.5, 0.0));
  CHECK(validate_fd(mid).ok);
  CHECK(fd_isomorphic(uni, mid, ScalarMode::Numeric).has_value());

  // A non-invariant step is rejected.
  SubObject wrong = sub;
  wrong.e_basis = Matrix::Zero(2, 1);
  wrong.e_basis(1, 0) = Complex(1.0, 0.0);
  CHECK_THROWS_AS(
      degenerate_family(uni, {wrong}, Complex(0.0, 0.0)),
      std::invalid_argument);
}

TEST_CASE("two-puncture description attached to local data") {
  LocalModel half;
  half.r = mat({{0.5}});
  half.theta_f = mat({{0.5}});
  half.t = mat({{1.0}});
  half.s = mat({{0.5}});
  FiniteDescription fd = fd_from_local(rh_local(half));
  CHECK(max_abs_diff(fd.rho.at("c1"), mat({{-1.0}})) < 1e-12);
  CHECK(max_abs_diff(fd.rho.at("c2"), mat({{-1.0}})) < 1e-12);
  CHECK(max_abs_diff(fd.punctures[0].c, mat({{-4.0}})) < 1e-12);
  CHECK(max_abs_diff(fd.punctures[0].v, mat({{0.5}})) < 1e-12);
  CHECK(validate_fd(fd).ok);

  for (std::uint64_t seed : {5u, 6u}) {
    FiniteDescription r = fd_from_local(rh_local(random_model(3, 2, seed)));
    FDValidation rep = validate_fd(r);
    CHECK(rep.ok);
    CHECK(r.total_dim() == 3 + 2 + 3);
  }
}
