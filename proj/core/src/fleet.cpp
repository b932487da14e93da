#include "gridhaul/fleet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gridhaul {

std::vector<std::string> check_params(const HdevParams& p) {
  if (p.capacity_kwh <= 0.0) throw Error("capacity_kwh must be > 0");
  if (p.consumption_kwh_per_mile <= 0.0)
    throw Error("consumption_kwh_per_mile must be > 0");
  if (p.speed_mph <= 0.0) throw Error("speed_mph must be > 0");
  if (p.charge_kw <= 0.0) throw Error("charge_kw must be > 0");
  if (p.reserve_fraction < 0.0 || p.reserve_fraction >= 1.0)
    throw Error("reserve_fraction must be in [0, 1)");

  std::vector<std::string> warnings;
  if (p.charge_kw < kChargeKwWarnLow || p.charge_kw > kChargeKwWarnHigh)
    warnings.push_back("charge_kw " + std::to_string(p.charge_kw) +
                       " is outside the plausible envelope [75, 600] kW");
  return warnings;
}

namespace {

int sample_weighted(const std::vector<std::pair<int, double>>& weights,
                    Rng& rng) {
  double total = 0.0;
  for (const auto& [_, w] : weights) {
    if (w < 0.0) throw Error("negative distribution weight");
    total += w;
  }
  if (total <= 0.0) throw Error("distribution weights are all zero");
  double u = rng.uniform() * total;
  for (const auto& [node, w] : weights) {
    u -= w;
    if (u < 0.0) return node;
  }
  return weights.back().first;
}

}  // namespace

std::vector<Hdev> spawn_arrivals(const ArrivalProcess& process,
                                 double dt_hours, Rng& rng,
                                 const HdevParams& params, int& next_id) {
  if (dt_hours <= 0.0) throw Error("dt_hours must be > 0");
  if (process.rate_per_hour < 0.0) throw Error("arrival rate must be >= 0");

  std::vector<Hdev> out;
  if (process.rate_per_hour == 0.0) return out;

  const std::uint64_t count = rng.poisson(process.rate_per_hour * dt_hours);
  for (std::uint64_t k = 0; k < count; ++k) {
    Hdev v;
    v.id = next_id++;
    v.params = params;
    v.current_node = sample_weighted(process.entry_weights, rng);
    v.destination = sample_weighted(process.destination_weights, rng);
    // Resample destination on collision; give up if the distributions
    // make a distinct pair effectively impossible.
    for (int attempt = 0; v.destination == v.current_node && attempt < 100;
         ++attempt)
      v.destination = sample_weighted(process.destination_weights, rng);
    v.soc_kwh = params.capacity_kwh * (0.5 + 0.5 * rng.uniform());
    v.state = HdevState::Idle;
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<FleetEvent> plan_route(Hdev& vehicle, const RoadGraph& graph) {
  if (vehicle.state == HdevState::Departed)
    throw Error("cannot route a departed vehicle");

  std::vector<FleetEvent> events;
  if (vehicle.current_node == vehicle.destination) {
    vehicle.itinerary.clear();
    vehicle.state = HdevState::Departed;
    events.push_back(
        {FleetEventKind::Departed, vehicle.id, vehicle.current_node});
    return events;
  }

  const Route route =
      shortest_path(graph, vehicle.current_node, vehicle.destination);
  if (!route.found) {
    vehicle.itinerary.clear();
    vehicle.state = HdevState::Departed;
    events.push_back(
        {FleetEventKind::Stranded, vehicle.id, vehicle.current_node});
    return events;
  }

  vehicle.itinerary.assign(route.path.begin() + 1, route.path.end());
  return events;
}

ChargeDecision charging_decision(const Hdev& vehicle, double next_leg_miles) {
  if (next_leg_miles < 0.0) throw Error("next_leg_miles must be >= 0");
  const double needed =
      next_leg_miles * vehicle.params.consumption_kwh_per_mile +
      vehicle.params.reserve_fraction * vehicle.params.capacity_kwh;
  return vehicle.soc_kwh < needed ? ChargeDecision::ChargeFirst
                                  : ChargeDecision::Proceed;
}

std::vector<FleetEvent> step_vehicle(Hdev& vehicle, double dt_hours,
                                     const RoadGraph& graph) {
  if (dt_hours <= 0.0) throw Error("dt_hours must be > 0");
  std::vector<FleetEvent> events;

  switch (vehicle.state) {
    case HdevState::Departed:
    case HdevState::Idle:
      return events;

    case HdevState::Charging: {
      const double room = vehicle.params.capacity_kwh - vehicle.soc_kwh;
      const double gained = vehicle.params.charge_kw * dt_hours;
      if (gained >= room) {
        vehicle.soc_kwh = vehicle.params.capacity_kwh;
        events.push_back(
            {FleetEventKind::FullyCharged, vehicle.id, vehicle.current_node});
      } else {
        vehicle.soc_kwh += gained;
      }
      return events;
    }

    case HdevState::Moving:
      break;
  }

  double miles_budget = vehicle.params.speed_mph * dt_hours;
  const double per_mile = vehicle.params.consumption_kwh_per_mile;

  while (miles_budget > 0.0 && vehicle.state == HdevState::Moving) {
    if (vehicle.itinerary.empty()) {
      // No edge to travel; treat as arrival at the current node.
      vehicle.state = HdevState::Departed;
      events.push_back(
          {FleetEventKind::Departed, vehicle.id, vehicle.current_node});
      break;
    }

    const double affordable = vehicle.soc_kwh / per_mile;
    double advance = std::min(miles_budget, vehicle.miles_remaining_on_edge);

    if (affordable < advance) {
      // Battery dies mid-edge. Stop where the charge runs out.
      vehicle.miles_remaining_on_edge -= affordable;
      vehicle.soc_kwh = 0.0;
      vehicle.state = HdevState::Departed;
      events.push_back(
          {FleetEventKind::Stranded, vehicle.id, vehicle.current_node});
      break;
    }

    vehicle.soc_kwh -= advance * per_mile;
    vehicle.miles_remaining_on_edge -= advance;
    miles_budget -= advance;

    if (vehicle.miles_remaining_on_edge > 0.0) break;  // dt exhausted mid-edge

    // Node reached.
    vehicle.current_node = vehicle.itinerary.front();
    vehicle.itinerary.erase(vehicle.itinerary.begin());
    events.push_back(
        {FleetEventKind::ArrivedAtNode, vehicle.id, vehicle.current_node});

    if (vehicle.itinerary.empty()) {
      vehicle.state = HdevState::Departed;
      events.push_back(
          {FleetEventKind::Departed, vehicle.id, vehicle.current_node});
      break;
    }

    const auto next_leg =
        graph.edge_miles(vehicle.current_node, vehicle.itinerary.front());
    if (!next_leg) {
      vehicle.state = HdevState::Departed;
      events.push_back(
          {FleetEventKind::Stranded, vehicle.id, vehicle.current_node});
      break;
    }

    if (charging_decision(vehicle, *next_leg) == ChargeDecision::ChargeFirst) {
      vehicle.state = HdevState::Idle;
      vehicle.miles_remaining_on_edge = 0.0;
      events.push_back(
          {FleetEventKind::NeedsCharge, vehicle.id, vehicle.current_node});
      break;
    }

    vehicle.miles_remaining_on_edge = *next_leg;
  }

  return events;
}

}  // namespace gridhaul
