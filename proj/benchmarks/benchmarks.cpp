// ---------------------------------------------------------------------------
// benchmarks.cpp
//
// Microbenchmarks for the hot paths: the entire-function engine, the two
// directions of the local correspondence, resonance repair, loop transport,
// and the numeric composition series.
// ---------------------------------------------------------------------------

#include <benchmark/benchmark.h>

#include "rhkit/finite_description.hpp"
#include "rhkit/fuchsian.hpp"
#include "rhkit/generators.hpp"
#include "rhkit/matfun.hpp"
#include "rhkit/rh_local.hpp"
#include "rhkit/shear.hpp"

namespace {

using namespace rhkit;

void bm_apply_entire(benchmark::State& state) {
  const Index n = Index(state.range(0));
  Matrix a = random_matrix(n, n, 7);
  for (auto _ : state)
    benchmark::DoNotOptimize(apply_entire(a, EntireKind::ExpM2Pi));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_apply_entire)->RangeMultiplier(2)->Range(2, 32)->Complexity();

void bm_branch_log(benchmark::State& state) {
  const Index n = Index(state.range(0));
  Matrix a = 0.3 * random_matrix(n, n, 11);
  Matrix m = apply_entire(a, EntireKind::ExpM2Pi);
  BranchSection section{0.0};
  for (auto _ : state) benchmark::DoNotOptimize(branch_log(m, section));
}
BENCHMARK(bm_branch_log)->RangeMultiplier(2)->Range(2, 32);

void bm_rh_round_trip(benchmark::State& state) {
  const Index n = Index(state.range(0));
  LocalModel mo = random_strip_model(n, n, 3);
  BranchSection section{0.0};
  for (auto _ : state)
    benchmark::DoNotOptimize(inv_rh_local(rh_local(mo), section));
}
BENCHMARK(bm_rh_round_trip)->RangeMultiplier(2)->Range(2, 16);

void bm_make_good(benchmark::State& state) {
  const Index n = Index(state.range(0));
  LocalModel mo = random_resonant_model(n, n, 5);
  for (auto _ : state) benchmark::DoNotOptimize(make_good(mo));
}
BENCHMARK(bm_make_good)->DenseRange(2, 6);

void bm_loop_transport(benchmark::State& state) {
  FuchsianSystem sys = random_fuchsian(Index(state.range(0)), 2, 9);
  LoopBasket basket = default_basket(sys);
  for (auto _ : state) {
    for (const PunctureLoop& loop : basket.loops)
      benchmark::DoNotOptimize(transport(sys, loop.circle));
  }
}
BENCHMARK(bm_loop_transport)->DenseRange(2, 4);

void bm_monodromy(benchmark::State& state) {
  FuchsianSystem sys = random_fuchsian(3, Index(state.range(0)), 13);
  for (auto _ : state) benchmark::DoNotOptimize(monodromy(sys));
}
BENCHMARK(bm_monodromy)->DenseRange(1, 3);

void bm_jordan_holder_numeric(benchmark::State& state) {
  const Index n = Index(state.range(0));
  FiniteDescription fd = fd_from_local(rh_local(random_model(n, n, 17)));
  for (auto _ : state)
    benchmark::DoNotOptimize(jordan_holder(fd, ScalarMode::Numeric));
}
BENCHMARK(bm_jordan_holder_numeric)->DenseRange(1, 4);

}  // namespace

BENCHMARK_MAIN();
