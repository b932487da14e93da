#pragma once

#include <optional>
#include <vector>

#include "gridhaul/grid.hpp"

namespace gridhaul {

struct RoadNode {
  int id = 0;
  int bus_id = 0;  // transmission bus this station location loads
  std::optional<GeoPoint> coord;
};

struct RoadEdge {
  int a = 0;
  int b = 0;
  double miles = 0.0;
};

// Constant weighted undirected graph of charging-station locations.
class RoadGraph {
 public:
  std::vector<RoadNode> nodes;
  std::vector<RoadEdge> edges;

  int index_of(int node_id) const;
  bool has_node(int node_id) const;
  const RoadNode& node(int node_id) const { return nodes[index_of(node_id)]; }

  // Direct edge weight between adjacent nodes, or nullopt.
  std::optional<double> edge_miles(int a, int b) const;

  // Rejects self-loops, nonpositive weights, and dangling endpoints.
  void check() const;
};

struct Route {
  std::vector<int> path;  // node ids, origin first; empty if unreachable
  double miles = 0.0;
  bool found = false;
};

// Dijkstra with deterministic tie-breaking: among equal-mileage paths the
// lexicographically smallest node-id sequence wins.
Route shortest_path(const RoadGraph& graph, int origin, int dest);

// Per-edge mileage of a path; every consecutive pair must be adjacent.
std::vector<double> leg_distances(const RoadGraph& graph,
                                  const std::vector<int>& path);

}  // namespace gridhaul
