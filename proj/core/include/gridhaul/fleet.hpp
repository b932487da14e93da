#pragma once

#include <vector>

#include "gridhaul/rng.hpp"
#include "gridhaul/road_network.hpp"

namespace gridhaul {

struct HdevParams {
  double capacity_kwh = 900.0;
  double consumption_kwh_per_mile = 2.0;
  double speed_mph = 60.0;
  double charge_kw = 150.0;
  double reserve_fraction = 0.1;  // SOC margin kept for routing decisions
};

// Charge rates outside this envelope are suspicious but not fatal.
inline constexpr double kChargeKwWarnLow = 75.0;
inline constexpr double kChargeKwWarnHigh = 600.0;

// Throws on invalid params; returns warnings (e.g. charge_kw outside the
// plausible envelope).
std::vector<std::string> check_params(const HdevParams& p);

enum class HdevState { Moving, Charging, Idle, Departed };

struct Hdev {
  int id = 0;
  HdevParams params;
  double soc_kwh = 0.0;
  HdevState state = HdevState::Idle;
  int current_node = -1;  // road node at or behind the vehicle
  int destination = -1;
  double miles_remaining_on_edge = 0.0;  // Moving: miles to itinerary.front()
  std::vector<int> itinerary;            // remaining nodes, next first
  int station_id = -1;                   // Charging/Idle at a station
};

struct ArrivalProcess {
  double rate_per_hour = 0.0;
  // (road node id, weight); weights nonnegative, not all zero.
  std::vector<std::pair<int, double>> entry_weights;
  std::vector<std::pair<int, double>> destination_weights;
};

enum class FleetEventKind {
  ArrivedAtNode,
  NeedsCharge,   // stopped at a node; wants a port before the next leg
  FullyCharged,
  Departed,      // reached its destination
  Stranded,      // ran out of charge or route; leaves the system
};

struct FleetEvent {
  FleetEventKind kind;
  int vehicle_id = 0;
  int node = -1;
};

// Poisson arrivals over dt. Start and destination are drawn from the
// configured weights, destinations resampled on collision with the start.
// Initial SOC uniform in [50%, 100%] of capacity.
std::vector<Hdev> spawn_arrivals(const ArrivalProcess& process,
                                 double dt_hours, Rng& rng,
                                 const HdevParams& params, int& next_id);

// Shortest-path itinerary to the destination. A vehicle already at its
// destination departs; an unreachable destination strands it.
std::vector<FleetEvent> plan_route(Hdev& vehicle, const RoadGraph& graph);

enum class ChargeDecision { Proceed, ChargeFirst };

// ChargeFirst iff soc < leg energy + reserve_fraction * capacity.
ChargeDecision charging_decision(const Hdev& vehicle, double next_leg_miles);

// Advance one vehicle by dt. Moving vehicles roll leftover dt into the
// next edge; at each node the charging rule decides whether to stop.
// Charging clips at capacity. SOC never leaves [0, capacity]; a vehicle
// that would run dry mid-edge stops with a Stranded event instead.
std::vector<FleetEvent> step_vehicle(Hdev& vehicle, double dt_hours,
                                     const RoadGraph& graph);

}  // namespace gridhaul
