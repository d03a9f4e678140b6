// Serial vs OpenMP-blocked RICA objective and gradient.

#include <benchmark/benchmark.h>

#include "lvlingam/ica.hpp"
#include "lvlingam/rng.hpp"

using namespace lvlingam;

namespace {

struct Inputs {
  Matrix z, w;
  RicaProblem pr{1.0 / 6.0, -1.0, 1.0};
};

Inputs make_inputs(int n) {
  Rng rng(1);
  const int p = 6, k = 9;
  Inputs in{Matrix(p, k), Matrix(p, n)};
  for (Eigen::Index i = 0; i < in.z.size(); ++i) in.z(i) = rng.normal() / 3.0;
  for (Eigen::Index i = 0; i < in.w.size(); ++i) in.w(i) = rng.normal();
  return in;
}

void serial(benchmark::State& state) {
  const auto in = make_inputs(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rica_objective_serial(in.z, in.w, in.pr));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void parallel(benchmark::State& state) {
  const auto in = make_inputs(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rica_objective_parallel(in.z, in.w, in.pr));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(serial)->Arg(1000)->Arg(10000)->Arg(30000)->Arg(100000);
BENCHMARK(parallel)->Arg(1000)->Arg(10000)->Arg(30000)->Arg(100000);

BENCHMARK_MAIN();
