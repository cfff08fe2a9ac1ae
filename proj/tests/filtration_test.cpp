// ---------------------------------------------------------------------------
// Filtration combinatorics: flags, jump graphs, compatibility, exact
// polygonal weights, graded degenerations, and slope decorations.
// ---------------------------------------------------------------------------

#include <doctest.h>
#include <rhkit/filtration.hpp>
#include <rhkit/generators.hpp>

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

// All non-decreasing integer vectors of the given length that start at 0 and
// stay within [0, max_value].
std::vector<std::vector<Index>> monotone_points(Index length, Index max_value) {
  std::vector<std::vector<Index>> out;
  std::vector<Index> cur{0};
  auto rec = [&](auto&& self, Index pos) -> void {
    if (pos == length) {
      out.push_back(cur);
      return;
    }
    for (Index v = cur.back(); v <= max_value; ++v) {
      cur.push_back(v);
      self(self, pos + 1);
      cur.pop_back();
    }
  };
  rec(rec, 1);
  return out;
}

// Independent existence check for a weight pair: strictly increasing integer
// sequences p, q with p(0) = q(0) = 0, equal at every jump of gs and with
// p <= q at every jump of gt (plotted as (value, index)).  Values up to
// J + K suffice: any valid rational pair collapses onto its order type.
bool weight_pair_exists(const JumpGraph& gs, const JumpGraph& gt) {
  const Index big_j = Index(gs.points.size()) - 1;
  const Index big_k = Index(gt.points.size()) - 1;
  const Index top = big_j + big_k;

  std::vector<std::vector<Index>> ps, qs;
  std::vector<Index> cur{0};
  auto rec = [&](auto&& self, Index pos, Index len,
                 std::vector<std::vector<Index>>& sink) -> void {
    if (pos == len) {
      sink.push_back(cur);
      return;
    }
    for (Index v = cur.back() + 1; v <= top; ++v) {
      cur.push_back(v);
      self(self, pos + 1, len, sink);
      cur.pop_back();
    }
  };
  rec(rec, 0, big_j, ps);
  cur = {0};
  rec(rec, 0, big_k, qs);

  for (const auto& p : ps)
    for (const auto& q : qs) {
      bool ok = true;
      for (const auto& jmp : gs.jumps)
        if (p[size_t(jmp.first)] != q[size_t(jmp.second)]) {
          ok = false;
          break;
        }
      if (ok)
        for (const auto& jmp : gt.jumps)
          if (p[size_t(jmp.second)] > q[size_t(jmp.first)]) {
            ok = false;
            break;
          }
      if (ok) return true;
    }
  return false;
}

}  // namespace

TEST_CASE("flag validation") {
  Flag good = coordinate_flag(3, {1, 3});
  CHECK(check_flag(good).ok);

  Flag no_steps;
  no_steps.dim = 2;
  CHECK_FALSE(check_flag(no_steps).ok);

  Flag not_nested;
  not_nested.dim = 2;
  not_nested.steps = {mat({{0.0}, {1.0}}), mat({{1.0}, {0.0}})};
  CHECK_FALSE(check_flag(not_nested).ok);

  Flag short_top;
  short_top.dim = 3;
  short_top.steps = {Matrix::Identity(3, 3).leftCols(2)};
  CHECK_FALSE(check_flag(short_top).ok);
}

TEST_CASE("jump graph of a map between flags") {
  Flag flag_e = coordinate_flag(2, {1, 2});
  Flag flag_f = coordinate_flag(1, {1});

  // Frozen containment example.
  JumpGraph g = jump_graph(mat({{0.0, 1.0}}), flag_e, flag_f);
  CHECK(g.points == std::vector<Index>{0, 0, 1});
  REQUIRE(g.jumps.size() == 1);
  CHECK(g.jumps[0] == std::pair<Index, Index>{2, 1});
  CHECK(g.warnings.empty());

  // Zero map never leaves the zero step.
  JumpGraph z = jump_graph(Matrix::Zero(1, 2), flag_e, flag_f);
  CHECK(z.points == std::vector<Index>{0, 0, 0});
  CHECK(z.jumps.empty());

  // Identity with equal flags climbs one step per step.
  Flag both = coordinate_flag(2, {1, 2});
  JumpGraph id = jump_graph(Matrix::Identity(2, 2), both, both);
  CHECK(id.points == std::vector<Index>{0, 1, 2});

  // Borderline containment (residual between tol and 10 tol) is flagged.
  Matrix wobble = Matrix::Identity(2, 2);
  wobble(1, 0) = Complex(5e-9, 0);
  JumpGraph w = jump_graph(wobble, both, both, 1e-9);
  CHECK(w.points == std::vector<Index>{0, 2, 2});
  CHECK(!w.warnings.empty());

  CHECK_THROWS_AS(jump_graph(Matrix::Zero(2, 2), flag_e, flag_f),
                  std::invalid_argument);
}

TEST_CASE("jump graph from raw points") {
  JumpGraph g = jump_graph_from_points({0, 0, 2, 2, 3});
  REQUIRE(g.jumps.size() == 2);
  CHECK(g.jumps[0] == std::pair<Index, Index>{2, 2});
  CHECK(g.jumps[1] == std::pair<Index, Index>{4, 3});
  CHECK_THROWS_AS(jump_graph_from_points({0, 2, 1}), std::invalid_argument);
  CHECK_THROWS_AS(jump_graph_from_points({}), std::invalid_argument);
}

TEST_CASE("compatibility of staircase pairs") {
  // Identical diagonal staircases meet only at their common jumps.
  JumpGraph diag_g = jump_graph_from_points({0, 1});
  CHECK(compatible(diag_g, diag_g));

  // Both regions filled: the shared interior cell is not a jump.
  JumpGraph full = jump_graph_from_points({1, 1});
  CHECK_FALSE(compatible(full, full));

  // Staircase overlap without matching jumps.
  CHECK_FALSE(compatible(jump_graph_from_points({0, 1, 2}),
                         jump_graph_from_points({0, 2, 2})));

  // Reference staircase pair: regions touch exactly at the one common jump.
  JumpGraph gs = jump_graph_from_points({0, 0, 0, 4, 4, 4, 6, 6, 8});
  JumpGraph gt = jump_graph_from_points({0, 1, 1, 2, 3, 5, 5, 7, 7});
  CHECK(compatible(gs, gt));

  CHECK_THROWS_AS(
      compatible(jump_graph_from_points({0, 5}), jump_graph_from_points({0})),
      std::invalid_argument);
}

TEST_CASE("polygonal weights: frozen cases") {
  // Single matching jump.
  auto w1 = polygonal_weights(jump_graph_from_points({0, 1}),
                              jump_graph_from_points({0, 1}));
  REQUIRE(w1.has_value());
  CHECK(w1->p[0] == Rational(0));
  CHECK(w1->q[0] == Rational(0));
  CHECK(w1->p[1] == w1->q[1]);
  CHECK(w1->p[1] > Rational(0));

  // Reference staircase pair.
  JumpGraph gs = jump_graph_from_points({0, 0, 0, 4, 4, 4, 6, 6, 8});
  JumpGraph gt = jump_graph_from_points({0, 1, 1, 2, 3, 5, 5, 7, 7});
  auto w2 = polygonal_weights(gs, gt);
  REQUIRE(w2.has_value());
  for (size_t i = 1; i < w2->p.size(); ++i) CHECK(w2->p[i] > w2->p[i - 1]);
  for (size_t i = 1; i < w2->q.size(); ++i) CHECK(w2->q[i] > w2->q[i - 1]);
  for (const auto& jmp : gs.jumps)
    CHECK(w2->p[size_t(jmp.first)] == w2->q[size_t(jmp.second)]);
  for (const auto& jmp : gt.jumps)
    CHECK(w2->p[size_t(jmp.second)] <= w2->q[size_t(jmp.first)]);

  // A jump of the second graph strictly below the forced line kills it.
  auto none = polygonal_weights(jump_graph_from_points({0, 2, 2}),
                                jump_graph_from_points({0, 1, 1}));
  CHECK_FALSE(none.has_value());
}

TEST_CASE("compatible, weights, and brute force agree on small grids") {
  auto graphs = monotone_points(2, 2);
  for (const auto& a : graphs)
    for (const auto& b : graphs) {
      JumpGraph gs = jump_graph_from_points(a);
      JumpGraph gt = jump_graph_from_points(b);
      bool comp = compatible(gs, gt);
      bool wts = polygonal_weights(gs, gt).has_value();
      bool brute = weight_pair_exists(gs, gt);
      CHECK(comp == wts);
      CHECK(wts == brute);
    }
}

TEST_CASE("graded strictification") {
  // Nilpotent residue dies in the graded model.
  LocalModel m = build(mat({{0.0, 1.0}, {0.0, 0.0}}), mat({{0.0}}),
                       mat({{0.0, 1.0}}), mat({{1.0}, {0.0}}));
  REQUIRE(validate(m).ok);
  Flag flag_e = coordinate_flag(2, {1, 2});
  Flag flag_f = coordinate_flag(1, {1});

  LocalModel g = graded(m, flag_e, flag_f);
  CHECK(norm1(g.r) < 1e-12);
  CHECK(norm1(g.t) < 1e-12);
  CHECK(near(g.s, m.s, 1e-12));
  CHECK(validate(g).ok);

  // Idempotence.
  LocalModel gg = graded(g, flag_e, flag_f);
  CHECK(near(gg.r, g.r, 1e-12));
  CHECK(near(gg.t, g.t, 1e-12));
  CHECK(near(gg.s, g.s, 1e-12));

  // Trivial flags change nothing.
  LocalModel id = graded(m, coordinate_flag(2, {2}), flag_f);
  CHECK(near(id.r, m.r, 1e-12));
  CHECK(near(id.t, m.t, 1e-12));

  // A residue that does not preserve the flag is rejected.
  LocalModel down = build(mat({{0.0, 0.0}, {1.0, 0.0}}), mat({{0.0}}),
                          mat({{1.0, 0.0}}), mat({{0.0}, {1.0}}));
  REQUIRE(validate(down).ok);
  CHECK_THROWS_AS(graded(down, flag_e, flag_f), std::invalid_argument);
}

TEST_CASE("deformation interpolates between model and graded") {
  LocalModel m = build(mat({{0.0, 1.0}, {0.0, 0.0}}), mat({{0.0}}),
                       mat({{0.0, 1.0}}), mat({{1.0}, {0.0}}));
  Flag flag_e = coordinate_flag(2, {1, 2});
  Flag flag_f = coordinate_flag(1, {1});

  LocalModel at_one = deform(m, flag_e, flag_f, Complex(1.0, 0.0));
  CHECK(near(at_one.r, m.r, 1e-12));
  CHECK(near(at_one.t, m.t, 1e-12));
  CHECK(near(at_one.s, m.s, 1e-12));

  LocalModel mid = deform(m, flag_e, flag_f, Complex(0.5, 0.0));
  CHECK(validate(mid).ok);
  IsoResult iso = isomorphic(m, mid);
  CHECK(iso.witness.has_value());

  LocalModel g = graded(m, flag_e, flag_f);
  LocalModel at_zero = deform(m, flag_e, flag_f, Complex(0.0, 0.0));
  CHECK(near(at_zero.r, g.r, 1e-14));
  LocalModel small = deform(m, flag_e, flag_f, Complex(1e-4, 0.0));
  CHECK(max_abs_diff(small.r, g.r) < 1e-3);
  CHECK(max_abs_diff(small.t, g.t) < 1e-3);
  CHECK(max_abs_diff(small.s, g.s) < 1e-3);
}

TEST_CASE("random filtered models degenerate cleanly") {
  std::mt19937_64 rng(404);
  std::normal_distribution<double> gauss(0.0, 1.0);
  // Weights: E side (1, 1, 2), F side (1, 2).
  std::vector<Index> we{1, 1, 2}, wf{1, 2};
  Flag flag_e = coordinate_flag(3, {2, 3});
  Flag flag_f = coordinate_flag(2, {1, 2});

  for (int rep = 0; rep < 6; ++rep) {
    Matrix t(2, 3), s(3, 2);
    for (Index i = 0; i < 2; ++i)
      for (Index j = 0; j < 3; ++j)
        t(i, j) = wf[size_t(i)] > we[size_t(j)]
                      ? Complex(0, 0)
                      : Complex(gauss(rng), gauss(rng));
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 2; ++j)
        s(i, j) = we[size_t(i)] > wf[size_t(j)]
                      ? Complex(0, 0)
                      : Complex(gauss(rng), gauss(rng));
    LocalModel m = build(s * t, t * s, t, s);
    REQUIRE(validate(m).ok);

    LocalModel g = graded(m, flag_e, flag_f);
    CHECK(validate(g).ok);
    LocalModel gg = graded(g, flag_e, flag_f);
    CHECK(near(gg.r, g.r, 1e-12));
    CHECK(near(gg.theta_f, g.theta_f, 1e-12));

    LocalModel tau = deform(m, flag_e, flag_f, Complex(0.3, 0.4));
    CHECK(validate(tau).ok);
    CHECK(isomorphic(m, tau).witness.has_value());
  }
}

TEST_CASE("slope decorations") {
  auto decorated = [](std::vector<std::pair<Index, int>> specs, Index dim) {
    Flag f = coordinate_flag(dim, [&] {
      std::vector<Index> dims;
      for (auto& sp : specs) dims.push_back(sp.first);
      return dims;
    }());
    for (auto& sp : specs)
      f.decorations.push_back(StepSlope{sp.first, Rational(sp.second)});
    return f;
  };

  CHECK(slope_special_check(decorated({{2, 0}}, 2)));
  CHECK(slope_special_check(decorated({{1, 0}, {2, 0}}, 2)));
  CHECK_FALSE(slope_special_check(decorated({{1, 1}, {2, 0}}, 2)));
  // Equal slopes with different ranks: (1, 1) inside (2, 2).
  CHECK(slope_special_check(decorated({{1, 1}, {2, 2}}, 2)));

  Flag naked = coordinate_flag(2, {1, 2});
  CHECK_THROWS_AS(slope_special_check(naked), std::invalid_argument);
}

TEST_CASE("bundle generator wires into the staircase pipeline") {
  for (std::uint64_t seed : {3u, 9u, 27u}) {
    StabilityBundle b = random_stability_bundle(3, 2, seed);
    REQUIRE(validate(b.model).ok);
    REQUIRE(check_flag(b.flag_e).ok);
    REQUIRE(check_flag(b.flag_f).ok);

    JumpGraph gs = jump_graph(b.model.t, b.flag_e, b.flag_f);
    JumpGraph gt = jump_graph(b.model.s, b.flag_f, b.flag_e);
    CHECK(Index(gs.points.size()) == b.flag_e.length() + 1);
    CHECK(Index(gt.points.size()) == b.flag_f.length() + 1);
    CHECK(compatible(gs, gt) == polygonal_weights(gs, gt).has_value());
  }
}
