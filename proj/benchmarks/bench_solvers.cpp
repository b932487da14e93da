#include <benchmark/benchmark.h>

#include <string>

#include "gridhaul/io.hpp"
#include "gridhaul/pf_distribution.hpp"
#include "gridhaul/pf_transmission.hpp"
#include "gridhaul/sim_engine.hpp"

using namespace gridhaul;

namespace {

const std::string kData = GRIDHAUL_DATA_DIR;

void BM_SolveNrCase30(benchmark::State& state) {
  const auto net = io::load_network(kData + "/case30.json");
  InjectionMap inj;
  inj[10].p_mw = 30.0;
  inj[20].p_mw = 25.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_nr(net, inj));
  }
}
BENCHMARK(BM_SolveNrCase30);

void BM_SolveNrCase30Warm(benchmark::State& state) {
  const auto net = io::load_network(kData + "/case30.json");
  InjectionMap inj;
  inj[10].p_mw = 30.0;
  const auto base = solve_nr(net, inj);
  PfOptions opts;
  opts.flat_start = false;
  inj[10].p_mw = 32.0;
  const PfStart start{base.v_mag, base.v_ang};
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_nr(net, inj, opts, start));
  }
}
BENCHMARK(BM_SolveNrCase30Warm);

void BM_SolveFbsFeeder56(benchmark::State& state) {
  const auto feeder = io::load_feeder(kData + "/feeder56.json");
  StationPlacement placement;
  placement.station_nodes = {10, 25, 40};
  placement.vehicles_per_station = {12, 8, 20};
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_fbs(feeder, placement));
  }
}
BENCHMARK(BM_SolveFbsFeeder56);

void BM_SweepCell(benchmark::State& state) {
  const auto feeder = io::load_feeder(kData + "/feeder56.json");
  SweepConfig cfg;
  cfg.station_counts = {10};
  cfg.vehicle_grid = {60};
  cfg.samples_per_cell = static_cast<int>(state.range(0));
  cfg.master_seed = 7;
  cfg.n_threads = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_distribution_sweep({{"f56", &feeder}}, cfg));
  }
}
BENCHMARK(BM_SweepCell)->Arg(10)->Arg(100);

void BM_TransmissionStep(benchmark::State& state) {
  const auto net = io::load_network(kData + "/case30.json");
  const auto road = io::load_road_graph(kData + "/road30.json");
  TransmissionScenario sc;
  sc.network = &net;
  sc.road = &road;
  sc.arrivals.rate_per_hour = 12.0;
  for (const auto& n : road.nodes) {
    sc.arrivals.entry_weights.push_back({n.id, 1.0});
    sc.arrivals.destination_weights.push_back({n.id, 1.0});
  }
  sc.initial_hdevs = 40;
  sc.duration_hours = 24.0;
  sc.dt_hours = 0.25;
  sc.seed = 42;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_transmission_scenario(sc));
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<long>(sc.duration_hours / sc.dt_hours));
}
BENCHMARK(BM_TransmissionStep);

}  // namespace

BENCHMARK_MAIN();
