#pragma once

#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "gridhaul/grid.hpp"

namespace gridhaul {

enum class PortStrategy { FIFO, ShortestRemainingCharge };

PortStrategy parse_port_strategy(const std::string& name);

// Per-vehicle lookup the station needs: charge rate and remaining energy
// to full. Keeps stations decoupled from the fleet container.
struct FleetView {
  std::function<double(int)> charge_kw;       // throws on unknown id
  std::function<double(int)> remaining_kwh;   // energy to full
};

class ChargingStation {
 public:
  int id = 0;
  int bus_id = 0;          // transmission bus (or feeder node) it loads
  int n_ports = 1;
  std::optional<GeoPoint> coord;

  const std::vector<int>& charging() const { return charging_; }
  const std::deque<int>& queue() const { return queue_; }
  bool contains(int vehicle_id) const;

  // Vehicle takes a free port or joins the queue tail. Duplicate
  // admission is rejected.
  void admit(int vehicle_id);

  // Removes the vehicle; a freed port goes to the queue head (FIFO).
  void release(int vehicle_id);

  // Promoted vehicles since the last drain; the sim engine flips their
  // state Idle -> Charging.
  std::vector<int> drain_promotions();

  // kW drawn right now: charging vehicles only, queued draw nothing.
  double aggregate_power(const FleetView& fleet) const;

  // Reassign ports under the given strategy. FIFO keeps admission order;
  // ShortestRemainingCharge gives ports to the vehicles closest to full,
  // ties broken by arrival order.
  void assign_ports(PortStrategy strategy, const FleetView& fleet);

 private:
  void promote();

  std::vector<int> charging_;     // in admission order
  std::deque<int> queue_;
  std::vector<int> arrival_log_;  // every vehicle ever admitted, in order
  std::vector<int> promotions_;
};

}  // namespace gridhaul
