#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridhaul/grid.hpp"

namespace gridhaul {

enum class ImpedanceUnit { PerUnit, Ohm };

struct FeederNode {
  int id = 0;
  double load_p = 0.0;  // kW
  double load_q = 0.0;  // kVAr
};

struct FeederLine {
  int from = 0;
  int to = 0;
  double r = 0.0;
  double x = 0.0;
};

// Radial medium-voltage circuit fed from a single substation node.
struct Feeder {
  double source_v = 1.0;  // pu at the substation head
  double base_kv = 12.47;
  double base_mva = 10.0;
  int source_node = 0;
  std::vector<FeederNode> nodes;  // includes the source node
  std::vector<FeederLine> lines;
  ImpedanceUnit impedance_unit = ImpedanceUnit::PerUnit;
  // Empty means every non-source node is a candidate station site.
  std::vector<int> candidate_station_nodes;

  std::size_t n_node() const { return nodes.size(); }
  int index_of(int node_id) const;
  bool has_node(int node_id) const;
};

struct StationPlacement {
  std::vector<int> station_nodes;
  std::vector<int> vehicles_per_station;  // aligned with station_nodes
  double per_vehicle_kw = 150.0;
};

// BFS order from the source; reversing it visits children before parents.
struct SweepOrder {
  std::vector<int> forward;        // node indices, source first
  std::vector<int> parent;         // parent node index (-1 at source)
  std::vector<int> parent_line;    // line index into feeder.lines (-1 at source)
};

// Rejects cycles (naming the closing edge) and disconnected nodes.
SweepOrder order_radial(const Feeder& feeder);

struct FbsSolution {
  std::vector<double> v_mag;  // pu, by node index
  bool converged = false;
  int iterations = 0;
};

// Forward-backward sweep. Station vehicles add count * per_vehicle_kw at
// the placement's nodes (unity power factor unless reactive_fraction is
// set: kvar = kw * reactive_fraction). Non-convergence is a flag.
FbsSolution solve_fbs(const Feeder& feeder, const StationPlacement& placement,
                      double tol = 1e-8, int max_iter = 100,
                      double reactive_fraction = 0.0);

// Uniform random placement: station nodes drawn without replacement from
// the candidate set, vehicles partitioned by uniform multinomial draw.
StationPlacement sample_placement(const Feeder& feeder, int n_stations,
                                  int n_vehicles, std::uint64_t seed,
                                  double per_vehicle_kw = 150.0);

// Candidate station sites: the explicit list when present, otherwise all
// non-source nodes.
std::vector<int> candidate_nodes(const Feeder& feeder);

// Recast the feeder as a transmission case (slack at the source, PQ
// elsewhere) so the Newton-Raphson solver can cross-check the sweep.
Network feeder_to_network(const Feeder& feeder,
                          const StationPlacement& placement,
                          double reactive_fraction = 0.0);

}  // namespace gridhaul
