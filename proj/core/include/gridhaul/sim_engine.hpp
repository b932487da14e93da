#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gridhaul/analytics.hpp"
#include "gridhaul/fleet.hpp"
#include "gridhaul/grid.hpp"
#include "gridhaul/pf_distribution.hpp"
#include "gridhaul/pf_transmission.hpp"
#include "gridhaul/road_network.hpp"
#include "gridhaul/stations.hpp"

namespace gridhaul {

// Per-bus time series, linearly interpolated between samples.
class TimeSeries {
 public:
  // Samples must be appended in nondecreasing time order per bus.
  void add(int bus_id, double t_hours, double value);
  bool empty() const { return by_bus_.empty(); }
  bool covers(double t0_hours, double t1_hours) const;
  double value(int bus_id, double t_hours) const;
  const std::map<int, std::vector<std::pair<double, double>>>& samples() const {
    return by_bus_;
  }

 private:
  std::map<int, std::vector<std::pair<double, double>>> by_bus_;
};

struct TransmissionScenario {
  const Network* network = nullptr;
  const RoadGraph* road = nullptr;
  // Station id == road node id. Road nodes without an explicit station get
  // a default one with effectively unbounded ports.
  std::vector<ChargingStation> stations;
  ArrivalProcess arrivals;
  HdevParams hdev_params;
  int initial_hdevs = 0;
  int default_station_ports = 1'000'000;
  TimeSeries load_p, load_q, wind_p, solar_p;  // MW/MVAr overrides, may be empty
  double start_hours = 0.0;
  double duration_hours = 24.0;
  double dt_hours = 0.25;
  std::uint64_t seed = 0;
  PfOptions pf_opts;
  ViolationBand band;
  double collapse_sentinel = 0.01;
  PortStrategy port_strategy = PortStrategy::FIFO;
};

struct StepRecord {
  double timestamp_hours = 0.0;
  int n_charging = 0;
  int n_idle = 0;
  int n_moving = 0;
  int n_departed = 0;  // cumulative, destination reached
  int n_stranded = 0;  // cumulative
  std::map<int, double> station_kw_by_bus;
  bool converged = false;
  std::vector<double> v_mag;  // sentinel-clamped on collapse
  int n_violations = 0;
  std::vector<int> violating_buses;  // bus ids
};

// Fixed per-step phase order: spawn, step vehicles, station events,
// aggregate power, background series, power flow (warm-started), record.
// Deterministic for a fixed seed. Solver collapse is recorded, never
// thrown; the next step restarts from flat.
std::vector<StepRecord> run_transmission_scenario(
    const TransmissionScenario& scenario);

struct SweepSample {
  std::string feeder_id;
  int n_stations = 0;
  int n_vehicles = 0;
  std::uint64_t placement_seed = 0;
  int n_violations = 0;
  bool converged = false;
};

struct SweepResult {
  std::vector<SweepSample> samples;
  std::vector<std::string> audit;  // skipped cells etc.
};

struct SweepConfig {
  std::vector<int> station_counts = {5, 10, 20, 50};
  std::vector<int> vehicle_grid;
  int samples_per_cell = 1;
  std::uint64_t master_seed = 0;
  double per_vehicle_kw = 150.0;
  ViolationBand band;
  double fbs_tol = 1e-8;
  int fbs_max_iter = 100;
  int n_threads = 0;  // 0 = GRIDHAUL_THREADS or hardware concurrency
};

// Monte Carlo snapshot sweep over (feeder, n_stations, n_vehicles) cells.
// Per-sample seeds derive deterministically from the master seed, so the
// output is identical regardless of thread count.
SweepResult run_distribution_sweep(
    const std::vector<std::pair<std::string, const Feeder*>>& feeders,
    const SweepConfig& cfg);

// Worker-count policy: explicit value, else GRIDHAUL_THREADS, else
// hardware concurrency.
int resolve_thread_count(int requested);

}  // namespace gridhaul
