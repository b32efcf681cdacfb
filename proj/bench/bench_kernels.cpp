#include <benchmark/benchmark.h>

#include "charlap/casebook.hpp"
#include "charlap/scenarios.hpp"

using namespace charlap;

namespace {

struct Fixture {
  Scenario s = load_scenario("real-heisenberg-contact", 20);
  WeakHarmonicWitness w = control_witness(build_witness(s, WitnessKind::RealDegree1));
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void pointwise(benchmark::State& state, Kernel kernel) {
  const Fixture& f = fixture();
  const int nodes = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(weak_pairings_pointwise(f.w, f.s, 8, nodes, kernel));
  state.SetItemsProcessed(state.iterations() * 8L * nodes * nodes * nodes);
}

void BM_PointwiseSerial(benchmark::State& state) { pointwise(state, Kernel::Serial); }
void BM_PointwiseOpenMP(benchmark::State& state) { pointwise(state, Kernel::OpenMP); }

void BM_AxisByAxis(benchmark::State& state) {
  const Fixture& f = fixture();
  WeakHarmonicWitness w = f.w;
  w.quadrature.nodes = w.quadrature.check_nodes = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(weak_harmonicity_verify(w, f.s, 8, 1, 1.0));
}

}  // namespace

BENCHMARK(BM_PointwiseSerial)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PointwiseOpenMP)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AxisByAxis)->Arg(12)->Arg(48)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
