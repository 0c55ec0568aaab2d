// Serial vs OpenMP timings for the data-parallel kernels.
#include <benchmark/benchmark.h>

#include <vector>

#include "ondamp/kernels.hpp"

namespace {

using namespace ondamp;

GainParams gains() {
  GainParams p;
  p.k = 100;
  p.mu = 1e-4;
  return p;
}

std::vector<ErrorState> grid_points(int n) {
  GridSpec g = GridSpec::default_grid();
  g.e1.n = n;
  g.e2.n = n;
  return g.points();
}

std::vector<SimJob> fig4_jobs(int copies) {
  const GainParams p = gains();
  const RefProfile ref = make_slope(1.0, 5.0);
  IntegratorConfig cfg;
  cfg.dt = 1e-4;
  cfg.t_end = 5.0;
  cfg.stop_on_convergence = false;
  const std::vector<PlantState> inits{
      {0.5, 50}, {0.1, 20}, {1, 0}, {1.5, -30}, {0.3, -20}};
  std::vector<SimJob> jobs;
  for (int c = 0; c < copies; ++c) {
    for (const PlantState& init : inits) {
      jobs.push_back({SystemSpec::tracking(p), init, ref, std::nullopt, cfg});
    }
  }
  return jobs;
}

template <PointBatch (*Fn)(const std::vector<ErrorState>&, const GainParams&,
                           const PMatrix&)>
void BM_points(benchmark::State& state) {
  const auto pts = grid_points(static_cast<int>(state.range(0)));
  const GainParams p = gains();
  const PMatrix P = PMatrix::energy_weight(p.k);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Fn(pts, p, P));
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(pts.size()));
}

template <EnergyGrid (*Fn)(const GainParams&, const Axis&, const Axis&)>
void BM_energy_grid(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Axis e1{-1, 1, n};
  const Axis e2{-1, 1, n};
  for (auto _ : state) {
    benchmark::DoNotOptimize(Fn(gains(), e1, e2));
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(n * n));
}

template <std::vector<SimOutcome> (*Fn)(const std::vector<SimJob>&)>
void BM_batch(benchmark::State& state) {
  const auto jobs = fig4_jobs(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(Fn(jobs));
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(jobs.size()));
}

}  // namespace

BENCHMARK(BM_points<evaluate_points_serial>)->Name("points/serial")->Arg(201)->Arg(801);
BENCHMARK(BM_points<evaluate_points>)->Name("points/omp")->Arg(201)->Arg(801);
BENCHMARK(BM_energy_grid<energy_rate_grid_serial>)->Name("energy_grid/serial")->Arg(400)->Arg(1600);
BENCHMARK(BM_energy_grid<energy_rate_grid>)->Name("energy_grid/omp")->Arg(400)->Arg(1600);
BENCHMARK(BM_batch<simulate_batch_serial>)->Name("batch/serial")->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_batch<simulate_batch>)->Name("batch/omp")->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
