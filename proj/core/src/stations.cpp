#include "gridhaul/stations.hpp"

#include <algorithm>
#include <string>
#include <utility>

namespace gridhaul {

PortStrategy parse_port_strategy(const std::string& name) {
  if (name == "fifo" || name == "FIFO") return PortStrategy::FIFO;
  if (name == "shortest-remaining-charge" || name == "ShortestRemainingCharge")
    return PortStrategy::ShortestRemainingCharge;
  throw Error("unknown port strategy '" + name + "'");
}

bool ChargingStation::contains(int vehicle_id) const {
  return std::find(charging_.begin(), charging_.end(), vehicle_id) !=
             charging_.end() ||
         std::find(queue_.begin(), queue_.end(), vehicle_id) != queue_.end();
}

void ChargingStation::admit(int vehicle_id) {
  if (contains(vehicle_id))
    throw Error("vehicle " + std::to_string(vehicle_id) +
                " already present at station " + std::to_string(id));
  arrival_log_.push_back(vehicle_id);
  if (static_cast<int>(charging_.size()) < n_ports) {
    charging_.push_back(vehicle_id);
    promotions_.push_back(vehicle_id);
  } else {
    queue_.push_back(vehicle_id);
  }
}

void ChargingStation::release(int vehicle_id) {
  if (auto it = std::find(charging_.begin(), charging_.end(), vehicle_id);
      it != charging_.end()) {
    charging_.erase(it);
    promote();
    return;
  }
  if (auto it = std::find(queue_.begin(), queue_.end(), vehicle_id);
      it != queue_.end()) {
    queue_.erase(it);
    return;
  }
  throw Error("vehicle " + std::to_string(vehicle_id) +
              " not present at station " + std::to_string(id));
}

void ChargingStation::promote() {
  while (static_cast<int>(charging_.size()) < n_ports && !queue_.empty()) {
    charging_.push_back(queue_.front());
    promotions_.push_back(queue_.front());
    queue_.pop_front();
  }
}

std::vector<int> ChargingStation::drain_promotions() {
  return std::exchange(promotions_, {});
}

double ChargingStation::aggregate_power(const FleetView& fleet) const {
  double kw = 0.0;
  for (int v : charging_) kw += fleet.charge_kw(v);
  return kw;
}

void ChargingStation::assign_ports(PortStrategy strategy,
                                   const FleetView& fleet) {
  // Pool everyone, then hand ports out under the strategy.
  std::vector<int> pool(charging_.begin(), charging_.end());
  pool.insert(pool.end(), queue_.begin(), queue_.end());

  auto arrival_rank = [this](int v) {
    auto it = std::find(arrival_log_.begin(), arrival_log_.end(), v);
    return std::distance(arrival_log_.begin(), it);
  };

  if (strategy == PortStrategy::FIFO) {
    std::stable_sort(pool.begin(), pool.end(), [&](int a, int b) {
      return arrival_rank(a) < arrival_rank(b);
    });
  } else {
    std::stable_sort(pool.begin(), pool.end(), [&](int a, int b) {
      const double ra = fleet.remaining_kwh(a);
      const double rb = fleet.remaining_kwh(b);
      if (ra != rb) return ra < rb;
      return arrival_rank(a) < arrival_rank(b);
    });
  }

  const auto was_charging = charging_;
  const int k = std::min<int>(n_ports, static_cast<int>(pool.size()));
  charging_.assign(pool.begin(), pool.begin() + k);
  queue_.assign(pool.begin() + k, pool.end());

  for (int v : charging_) {
    if (std::find(was_charging.begin(), was_charging.end(), v) ==
        was_charging.end())
      promotions_.push_back(v);
  }
}

}  // namespace gridhaul
