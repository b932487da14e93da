#include <doctest.h>

#include <algorithm>

#include "gridhaul/fleet.hpp"

using namespace gridhaul;

namespace {

// Line of three nodes 1 - 2 - 3, 30 miles per edge (half an hour at 60 mph).
RoadGraph line3() {
  RoadGraph g;
  g.nodes = {{1, 0, {}}, {2, 0, {}}, {3, 0, {}}};
  g.edges = {{1, 2, 30.0}, {2, 3, 30.0}};
  return g;
}

// Routed and already rolling, the way the engine launches a vehicle.
Hdev make_vehicle(const RoadGraph& g, int from, int to, double soc) {
  Hdev v;
  v.id = 1;
  v.soc_kwh = soc;
  v.current_node = from;
  v.destination = to;
  plan_route(v, g);
  if (v.state != HdevState::Departed && !v.itinerary.empty()) {
    v.state = HdevState::Moving;
    v.miles_remaining_on_edge = *g.edge_miles(from, v.itinerary.front());
  }
  return v;
}

bool has_event(const std::vector<FleetEvent>& events, FleetEventKind kind) {
  return std::any_of(events.begin(), events.end(),
                     [&](const FleetEvent& e) { return e.kind == kind; });
}

}  // namespace

TEST_CASE("check_params throws on nonsense, warns on odd charge rates") {
  HdevParams p;
  CHECK(check_params(p).empty());

  p.charge_kw = 50.0;
  CHECK(!check_params(p).empty());
  p.charge_kw = 700.0;
  CHECK(!check_params(p).empty());

  p = {};
  p.capacity_kwh = 0.0;
  CHECK_THROWS_AS(check_params(p), Error);
  p = {};
  p.speed_mph = -5.0;
  CHECK_THROWS_AS(check_params(p), Error);
  p = {};
  p.reserve_fraction = 1.5;
  CHECK_THROWS_AS(check_params(p), Error);
}

TEST_CASE("charging rule: threshold is leg energy plus reserve") {
  Hdev v;
  v.params = HdevParams{};  // 900 kWh, 2 kWh/mi, reserve 0.1 -> 90 kWh
  const double leg = 100.0;  // 200 kWh

  v.soc_kwh = 290.0;  // exactly at threshold: proceed (strict <)
  CHECK(charging_decision(v, leg) == ChargeDecision::Proceed);
  v.soc_kwh = 289.9;
  CHECK(charging_decision(v, leg) == ChargeDecision::ChargeFirst);
  v.soc_kwh = 900.0;
  CHECK(charging_decision(v, leg) == ChargeDecision::Proceed);
}

TEST_CASE("plan_route: already there departs, unreachable strands") {
  const auto g = line3();
  Hdev at_dest;
  at_dest.current_node = 2;
  at_dest.destination = 2;
  const auto ev1 = plan_route(at_dest, g);
  CHECK(at_dest.state == HdevState::Departed);
  CHECK(has_event(ev1, FleetEventKind::Departed));

  auto island = g;
  island.nodes.push_back({9, 0, {}});
  Hdev lost;
  lost.current_node = 1;
  lost.destination = 9;
  const auto ev2 = plan_route(lost, island);
  CHECK(has_event(ev2, FleetEventKind::Stranded));
}

TEST_CASE("moving vehicle crosses one edge in exactly half an hour") {
  const auto g = line3();
  auto v = make_vehicle(g, 1, 3, 900.0);
  REQUIRE(v.state == HdevState::Moving);

  const auto ev = step_vehicle(v, 0.5, g);
  CHECK(has_event(ev, FleetEventKind::ArrivedAtNode));
  CHECK(v.current_node == 2);
  // 30 miles at 2 kWh/mile.
  CHECK(v.soc_kwh == doctest::Approx(900.0 - 60.0).epsilon(1e-12));
}

TEST_CASE("leftover dt rolls into the next edge") {
  const auto g = line3();
  auto v = make_vehicle(g, 1, 3, 900.0);

  // 0.75 h = 45 miles: past node 2, halfway down the second edge.
  step_vehicle(v, 0.75, g);
  CHECK(v.state == HdevState::Moving);
  CHECK(v.current_node == 2);
  CHECK(v.miles_remaining_on_edge == doctest::Approx(15.0));
  CHECK(v.soc_kwh == doctest::Approx(900.0 - 90.0));

  const auto ev = step_vehicle(v, 0.25, g);
  CHECK(has_event(ev, FleetEventKind::Departed));
  CHECK(v.state == HdevState::Departed);
}

TEST_CASE("low SOC at a node requests a charge instead of proceeding") {
  const auto g = line3();
  // Needs 60 kWh for the next leg + 90 reserve = 150; start just below
  // after the first edge: 200 - 60 = 140 on arrival at node 2.
  auto v = make_vehicle(g, 1, 3, 200.0);
  const auto ev = step_vehicle(v, 0.5, g);
  CHECK(has_event(ev, FleetEventKind::NeedsCharge));
  CHECK(v.state == HdevState::Idle);
  CHECK(v.current_node == 2);
  // Itinerary survives so the trip can resume after charging.
  CHECK(!v.itinerary.empty());
}

TEST_CASE("a vehicle that would run dry mid-edge strands at zero") {
  const auto g = line3();
  // 40 kWh covers 20 of the 30 miles of the first edge.
  auto v = make_vehicle(g, 1, 3, 40.0);
  const auto ev = step_vehicle(v, 2.0, g);
  CHECK(has_event(ev, FleetEventKind::Stranded));
  CHECK(v.soc_kwh == 0.0);
  CHECK(v.miles_remaining_on_edge == doctest::Approx(10.0));
}

TEST_CASE("charging raises SOC by rate * dt and clips at capacity") {
  const auto g = line3();
  Hdev v;
  v.state = HdevState::Charging;
  v.current_node = 2;
  v.destination = 3;
  v.itinerary = {3};
  v.soc_kwh = 800.0;

  step_vehicle(v, 0.5, g);  // +75 kWh
  CHECK(v.soc_kwh == doctest::Approx(875.0));
  CHECK(v.state == HdevState::Charging);

  const auto ev = step_vehicle(v, 1.0, g);  // clips at 900
  CHECK(v.soc_kwh == doctest::Approx(900.0));
  CHECK(has_event(ev, FleetEventKind::FullyCharged));
}

TEST_CASE("SOC only falls while moving and only rises while charging") {
  const auto g = line3();
  auto v = make_vehicle(g, 1, 3, 900.0);
  double prev = v.soc_kwh;
  for (int i = 0; i < 3 && v.state == HdevState::Moving; ++i) {
    step_vehicle(v, 0.1, g);
    CHECK(v.soc_kwh <= prev);
    prev = v.soc_kwh;
  }

  Hdev idle;
  idle.state = HdevState::Idle;
  idle.current_node = 2;
  idle.soc_kwh = 100.0;
  step_vehicle(idle, 1.0, g);
  CHECK(idle.soc_kwh == 100.0);
}

TEST_CASE("spawn_arrivals: Poisson mean, weighted endpoints, id sequence") {
  ArrivalProcess proc;
  proc.rate_per_hour = 8.0;
  proc.entry_weights = {{1, 1.0}, {2, 3.0}};
  proc.destination_weights = {{2, 1.0}, {3, 1.0}};
  HdevParams params;

  Rng rng(77);
  int next_id = 0;
  std::size_t total = 0;
  int entry_two = 0;
  const int steps = 4000;
  for (int i = 0; i < steps; ++i) {
    const auto batch = spawn_arrivals(proc, 0.25, rng, params, next_id);
    total += batch.size();
    for (const auto& v : batch) {
      CHECK((v.current_node == 1 || v.current_node == 2));
      CHECK((v.destination == 2 || v.destination == 3));
      CHECK(v.destination != v.current_node);
      CHECK(v.soc_kwh >= 0.5 * params.capacity_kwh);
      CHECK(v.soc_kwh <= params.capacity_kwh);
      if (v.current_node == 2) ++entry_two;
    }
  }
  CHECK(next_id == static_cast<int>(total));

  // Mean 8 * 0.25 * 4000 = 8000; 4 sigma of a Poisson total ~ 358.
  CHECK(total > 8000 - 400);
  CHECK(total < 8000 + 400);
  // Entry node 2 has weight 3 of 4.
  const double frac = static_cast<double>(entry_two) / total;
  CHECK(frac > 0.70);
  CHECK(frac < 0.80);
}

TEST_CASE("spawn_arrivals is deterministic for a fixed rng state") {
  ArrivalProcess proc;
  proc.rate_per_hour = 5.0;
  proc.entry_weights = {{1, 1.0}, {3, 1.0}};
  proc.destination_weights = {{1, 1.0}, {2, 1.0}, {3, 1.0}};
  HdevParams params;

  auto run = [&] {
    Rng rng(99);
    int next_id = 0;
    std::vector<Hdev> all;
    for (int i = 0; i < 50; ++i) {
      auto batch = spawn_arrivals(proc, 0.5, rng, params, next_id);
      all.insert(all.end(), batch.begin(), batch.end());
    }
    return all;
  };
  const auto a = run();
  const auto b = run();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].current_node == b[i].current_node);
    CHECK(a[i].destination == b[i].destination);
    CHECK(a[i].soc_kwh == b[i].soc_kwh);
  }
}
