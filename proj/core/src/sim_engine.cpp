#include "gridhaul/sim_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <thread>

namespace gridhaul {

void TimeSeries::add(int bus_id, double t_hours, double value) {
  auto& v = by_bus_[bus_id];
  if (!v.empty() && t_hours < v.back().first)
    throw Error("time series samples for bus " + std::to_string(bus_id) +
                " are out of order");
  v.emplace_back(t_hours, value);
}

bool TimeSeries::covers(double t0, double t1) const {
  for (const auto& [bus, v] : by_bus_) {
    if (v.empty() || v.front().first > t0 || v.back().first < t1) return false;
  }
  return true;
}

double TimeSeries::value(int bus_id, double t) const {
  auto it = by_bus_.find(bus_id);
  if (it == by_bus_.end())
    throw Error("no time series for bus " + std::to_string(bus_id));
  const auto& v = it->second;
  if (v.empty() || t < v.front().first || t > v.back().first)
    throw Error("time " + std::to_string(t) +
                " h outside series coverage for bus " + std::to_string(bus_id));
  auto hi = std::lower_bound(
      v.begin(), v.end(), t,
      [](const std::pair<double, double>& s, double tt) { return s.first < tt; });
  if (hi == v.begin()) return hi->second;
  auto lo = std::prev(hi);
  if (hi == v.end()) return lo->second;
  if (hi->first == lo->first) return hi->second;
  const double a = (t - lo->first) / (hi->first - lo->first);
  return lo->second * (1.0 - a) + hi->second * a;
}

namespace {

struct FleetState {
  std::vector<Hdev> vehicles;  // by insertion order; ids ascending
  int next_id = 0;
  int departed_total = 0;
  int stranded_total = 0;

  Hdev* find(int id) {
    for (auto& v : vehicles) {
      if (v.id == id) return &v;
    }
    return nullptr;
  }
};

FleetView make_view(FleetState& fleet) {
  FleetView view;
  view.charge_kw = [&fleet](int id) {
    const Hdev* v = fleet.find(id);
    if (!v) throw Error("unknown vehicle id " + std::to_string(id));
    return v->params.charge_kw;
  };
  view.remaining_kwh = [&fleet](int id) {
    const Hdev* v = fleet.find(id);
    if (!v) throw Error("unknown vehicle id " + std::to_string(id));
    return v->params.capacity_kwh - v->soc_kwh;
  };
  return view;
}

// Start a freshly routed vehicle moving, parked for charge, or departed.
void launch_vehicle(Hdev& v, const RoadGraph& road,
                    std::vector<FleetEvent>& events) {
  auto route_events = plan_route(v, road);
  events.insert(events.end(), route_events.begin(), route_events.end());
  if (v.state == HdevState::Departed || v.itinerary.empty()) return;

  const auto leg = road.edge_miles(v.current_node, v.itinerary.front());
  if (!leg) {
    v.state = HdevState::Departed;
    events.push_back({FleetEventKind::Stranded, v.id, v.current_node});
    return;
  }
  if (charging_decision(v, *leg) == ChargeDecision::ChargeFirst) {
    v.state = HdevState::Idle;
    events.push_back({FleetEventKind::NeedsCharge, v.id, v.current_node});
  } else {
    v.state = HdevState::Moving;
    v.miles_remaining_on_edge = *leg;
  }
}

}  // namespace

std::vector<StepRecord> run_transmission_scenario(
    const TransmissionScenario& sc) {
  if (!sc.network || !sc.road) throw Error("scenario is missing grid or road");
  require_valid(*sc.network);
  sc.road->check();
  if (sc.duration_hours <= 0.0 || sc.dt_hours <= 0.0)
    throw Error("duration and dt must be > 0");
  check_params(sc.hdev_params);

  const double t_end = sc.start_hours + sc.duration_hours;
  for (const TimeSeries* ts : {&sc.load_p, &sc.load_q, &sc.wind_p, &sc.solar_p}) {
    if (!ts->empty() && !ts->covers(sc.start_hours, t_end))
      throw Error("time series does not cover the simulation horizon");
  }

  // Stations by road node id; missing nodes get a default wide-open one.
  std::map<int, ChargingStation> stations;
  for (const auto& st : sc.stations) {
    sc.road->index_of(st.id);
    if (!stations.emplace(st.id, st).second)
      throw Error("duplicate station id " + std::to_string(st.id));
  }
  for (const auto& node : sc.road->nodes) {
    if (!stations.count(node.id)) {
      ChargingStation st;
      st.id = node.id;
      st.bus_id = node.bus_id;
      st.n_ports = sc.default_station_ports;
      stations.emplace(node.id, st);
    }
  }
  for (const auto& [id, st] : stations) {
    if (!sc.network->has_bus(st.bus_id))
      throw Error("station " + std::to_string(id) + " references unknown bus " +
                  std::to_string(st.bus_id));
  }

  Rng rng(sc.seed);
  FleetState fleet;
  std::map<int, int> vehicle_station;  // vehicle id -> station id

  auto handle_events = [&](std::vector<FleetEvent>& events) {
    std::stable_sort(events.begin(), events.end(),
                     [](const FleetEvent& a, const FleetEvent& b) {
                       return a.vehicle_id < b.vehicle_id;
                     });
    for (const auto& ev : events) {
      switch (ev.kind) {
        case FleetEventKind::NeedsCharge: {
          auto it = stations.find(ev.node);
          if (it == stations.end())
            throw Error("no station at road node " + std::to_string(ev.node));
          it->second.admit(ev.vehicle_id);
          vehicle_station[ev.vehicle_id] = ev.node;
          break;
        }
        case FleetEventKind::FullyCharged: {
          auto vs = vehicle_station.find(ev.vehicle_id);
          if (vs != vehicle_station.end()) {
            stations.at(vs->second).release(ev.vehicle_id);
            vehicle_station.erase(vs);
          }
          Hdev* v = fleet.find(ev.vehicle_id);
          if (v && !v->itinerary.empty()) {
            const auto leg =
                sc.road->edge_miles(v->current_node, v->itinerary.front());
            if (leg && charging_decision(*v, *leg) == ChargeDecision::Proceed) {
              v->state = HdevState::Moving;
              v->miles_remaining_on_edge = *leg;
            } else {
              // Full battery still cannot make the leg: no feasible trip.
              v->state = HdevState::Departed;
              ++fleet.stranded_total;
            }
          }
          break;
        }
        case FleetEventKind::Departed:
        case FleetEventKind::Stranded: {
          auto vs = vehicle_station.find(ev.vehicle_id);
          if (vs != vehicle_station.end()) {
            stations.at(vs->second).release(ev.vehicle_id);
            vehicle_station.erase(vs);
          }
          if (ev.kind == FleetEventKind::Departed)
            ++fleet.departed_total;
          else
            ++fleet.stranded_total;
          break;
        }
        case FleetEventKind::ArrivedAtNode:
          break;
      }
    }
    // Queue promotions become actual charging state.
    for (auto& [id, st] : stations) {
      for (int vid : st.drain_promotions()) {
        Hdev* v = fleet.find(vid);
        if (v && v->state == HdevState::Idle) v->state = HdevState::Charging;
      }
    }
  };

  // Initial fleet, sampled from the arrival process before the first step.
  if (sc.initial_hdevs > 0) {
    std::vector<FleetEvent> events;
    auto sample_w = [&](const std::vector<std::pair<int, double>>& w) {
      double total = 0.0;
      for (const auto& [_, wt] : w) total += wt;
      if (total <= 0.0) throw Error("distribution weights are all zero");
      double u = rng.uniform() * total;
      for (const auto& [node, wt] : w) {
        u -= wt;
        if (u < 0.0) return node;
      }
      return w.back().first;
    };
    for (int k = 0; k < sc.initial_hdevs; ++k) {
      Hdev v;
      v.id = fleet.next_id++;
      v.params = sc.hdev_params;
      v.current_node = sample_w(sc.arrivals.entry_weights);
      v.destination = sample_w(sc.arrivals.destination_weights);
      for (int a = 0; v.destination == v.current_node && a < 100; ++a)
        v.destination = sample_w(sc.arrivals.destination_weights);
      v.soc_kwh = sc.hdev_params.capacity_kwh * (0.5 + 0.5 * rng.uniform());
      v.state = HdevState::Idle;
      fleet.vehicles.push_back(std::move(v));
      launch_vehicle(fleet.vehicles.back(), *sc.road, events);
    }
    handle_events(events);
  }

  std::vector<StepRecord> records;
  std::optional<PfStart> warm;

  const int n_steps =
      static_cast<int>(std::llround(sc.duration_hours / sc.dt_hours));

  for (int step = 0; step < n_steps; ++step) {
    const double t = sc.start_hours + (step + 1) * sc.dt_hours;
    std::vector<FleetEvent> events;

    // 1. arrivals
    auto arrivals =
        spawn_arrivals(sc.arrivals, sc.dt_hours, rng, sc.hdev_params,
                       fleet.next_id);
    for (auto& v : arrivals) {
      fleet.vehicles.push_back(std::move(v));
      launch_vehicle(fleet.vehicles.back(), *sc.road, events);
    }

    // 2. step vehicles in id order
    for (auto& v : fleet.vehicles) {
      if (v.state == HdevState::Departed) continue;
      auto ev = step_vehicle(v, sc.dt_hours, *sc.road);
      events.insert(events.end(), ev.begin(), ev.end());
    }

    // 3. station admissions / releases
    handle_events(events);

    // 3b. optional port reshuffle under the configured strategy
    auto view = make_view(fleet);
    if (sc.port_strategy != PortStrategy::FIFO) {
      for (auto& [id, st] : stations) {
        st.assign_ports(sc.port_strategy, view);
        st.drain_promotions();
        for (int vid : st.charging()) {
          if (Hdev* v = fleet.find(vid); v && v->state == HdevState::Idle)
            v->state = HdevState::Charging;
        }
        for (int vid : st.queue()) {
          if (Hdev* v = fleet.find(vid); v && v->state == HdevState::Charging)
            v->state = HdevState::Idle;
        }
      }
    }

    // 4. aggregate station power per bus
    std::map<int, double> station_kw;
    for (const auto& [id, st] : stations) {
      const double kw = st.aggregate_power(view);
      if (kw > 0.0) station_kw[st.bus_id] += kw;
    }

    // 5. background series as injections on top of the case loads
    InjectionMap inj;
    for (const auto& [bus_id, kw] : station_kw) inj[bus_id].p_mw += kw / 1000.0;
    if (!sc.load_p.empty()) {
      for (const auto& [bus_id, _] : sc.load_p.samples())
        inj[bus_id].p_mw +=
            sc.load_p.value(bus_id, t) - sc.network->bus(bus_id).load_p;
    }
    if (!sc.load_q.empty()) {
      for (const auto& [bus_id, _] : sc.load_q.samples())
        inj[bus_id].q_mvar +=
            sc.load_q.value(bus_id, t) - sc.network->bus(bus_id).load_q;
    }
    if (!sc.wind_p.empty()) {
      for (const auto& [bus_id, _] : sc.wind_p.samples())
        inj[bus_id].p_mw -= sc.wind_p.value(bus_id, t);
    }
    if (!sc.solar_p.empty()) {
      for (const auto& [bus_id, _] : sc.solar_p.samples())
        inj[bus_id].p_mw -= sc.solar_p.value(bus_id, t);
    }

    // 6. power flow, warm-started from the previous converged step
    PfOptions opts = sc.pf_opts;
    opts.flat_start = !warm.has_value();
    const auto sol = solve_nr(*sc.network, inj, opts, warm);
    warm = sol.converged ? std::optional<PfStart>(PfStart{sol.v_mag, sol.v_ang})
                         : std::nullopt;  // collapsed: next step flat-starts

    // 7. record
    StepRecord rec;
    rec.timestamp_hours = t;
    for (const auto& v : fleet.vehicles) {
      switch (v.state) {
        case HdevState::Charging: ++rec.n_charging; break;
        case HdevState::Idle: ++rec.n_idle; break;
        case HdevState::Moving: ++rec.n_moving; break;
        case HdevState::Departed: break;
      }
    }
    rec.n_departed = fleet.departed_total;
    rec.n_stranded = fleet.stranded_total;
    rec.station_kw_by_bus = station_kw;
    rec.converged = sol.converged;
    rec.v_mag = export_voltages(sol, sc.collapse_sentinel);
    const auto rep = count_violations(rec.v_mag, sc.band);
    rec.n_violations = rep.count;
    for (int idx : rep.bus_indices)
      rec.violating_buses.push_back(sc.network->buses[idx].id);
    records.push_back(std::move(rec));
  }

  return records;
}

int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("GRIDHAUL_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

SweepResult run_distribution_sweep(
    const std::vector<std::pair<std::string, const Feeder*>>& feeders,
    const SweepConfig& cfg) {
  if (cfg.station_counts.empty()) throw Error("station_counts is empty");
  if (cfg.vehicle_grid.empty()) throw Error("vehicle_grid is empty");
  if (cfg.samples_per_cell < 1) throw Error("samples_per_cell must be >= 1");

  SweepResult result;
  struct Task {
    const Feeder* feeder;
    std::string feeder_id;
    int n_stations;
    int n_vehicles;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;

  std::uint64_t cell = 0;
  for (const auto& [fid, feeder] : feeders) {
    const auto candidates = candidate_nodes(*feeder);
    for (int n_st : cfg.station_counts) {
      if (static_cast<std::size_t>(n_st) > candidates.size()) {
        result.audit.push_back("feeder " + fid + ": skipped " +
                               std::to_string(n_st) +
                               " stations (only " +
                               std::to_string(candidates.size()) +
                               " candidate nodes)");
        ++cell;
        continue;
      }
      for (int n_v : cfg.vehicle_grid) {
        for (int s = 0; s < cfg.samples_per_cell; ++s) {
          const std::uint64_t stream =
              cell * 1000003ull + static_cast<std::uint64_t>(n_v) * 1009ull +
              static_cast<std::uint64_t>(s);
          tasks.push_back({feeder, fid, n_st, n_v,
                           Rng::derive_seed(cfg.master_seed, stream)});
        }
        ++cell;
      }
    }
  }

  result.samples.resize(tasks.size());
  const int n_threads = std::min(
      resolve_thread_count(cfg.n_threads),
      std::max(1, static_cast<int>(tasks.size())));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& t = tasks[i];
      const auto placement = sample_placement(*t.feeder, t.n_stations,
                                              t.n_vehicles, t.seed,
                                              cfg.per_vehicle_kw);
      const auto sol =
          solve_fbs(*t.feeder, placement, cfg.fbs_tol, cfg.fbs_max_iter);
      SweepSample s;
      s.feeder_id = t.feeder_id;
      s.n_stations = t.n_stations;
      s.n_vehicles = t.n_vehicles;
      s.placement_seed = t.seed;
      s.converged = sol.converged;
      s.n_violations =
          sol.converged
              ? count_violations(sol.v_mag, cfg.band).count
              : static_cast<int>(t.feeder->n_node());  // collapse: all out
      result.samples[i] = std::move(s);
    }
  };

  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return result;
}

}  // namespace gridhaul
