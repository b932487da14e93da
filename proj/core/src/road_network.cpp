#include "gridhaul/road_network.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <string>

namespace gridhaul {

int RoadGraph::index_of(int node_id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id == node_id) return static_cast<int>(i);
  }
  throw Error("unknown road node id " + std::to_string(node_id));
}

bool RoadGraph::has_node(int node_id) const {
  for (const auto& n : nodes) {
    if (n.id == node_id) return true;
  }
  return false;
}

std::optional<double> RoadGraph::edge_miles(int a, int b) const {
  for (const auto& e : edges) {
    if ((e.a == a && e.b == b) || (e.a == b && e.b == a)) return e.miles;
  }
  return std::nullopt;
}

void RoadGraph::check() const {
  for (const auto& e : edges) {
    if (e.a == e.b)
      throw Error("road edge at node " + std::to_string(e.a) +
                  " is a self-loop");
    if (e.miles <= 0.0)
      throw Error("road edge (" + std::to_string(e.a) + ", " +
                  std::to_string(e.b) + ") must have miles > 0");
    index_of(e.a);
    index_of(e.b);
  }
}

Route shortest_path(const RoadGraph& graph, int origin, int dest) {
  graph.index_of(origin);
  graph.index_of(dest);

  Route route;
  if (origin == dest) {
    route.path = {origin};
    route.miles = 0.0;
    route.found = true;
    return route;
  }

  const int n = static_cast<int>(graph.nodes.size());
  std::vector<std::vector<std::pair<int, double>>> adj(n);
  for (const auto& e : graph.edges) {
    const int a = graph.index_of(e.a);
    const int b = graph.index_of(e.b);
    adj[a].emplace_back(b, e.miles);
    adj[b].emplace_back(a, e.miles);
  }

  // Label = (distance, node-id path); ties resolved lexicographically so
  // equal-mileage routes are reproducible.
  struct Label {
    double dist;
    std::vector<int> path;
  };
  auto better = [](const Label& a, const Label& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    return a.path < b.path;
  };

  std::vector<std::optional<Label>> best(n);
  std::vector<bool> done(n, false);

  const int src = graph.index_of(origin);
  const int dst = graph.index_of(dest);
  best[src] = Label{0.0, {origin}};

  for (;;) {
    int u = -1;
    for (int i = 0; i < n; ++i) {
      if (done[i] || !best[i]) continue;
      if (u < 0 || better(*best[i], *best[u])) u = i;
    }
    if (u < 0) break;
    done[u] = true;
    if (u == dst) break;
    for (const auto& [v, w] : adj[u]) {
      if (done[v]) continue;
      Label cand{best[u]->dist + w, best[u]->path};
      cand.path.push_back(graph.nodes[v].id);
      if (!best[v] || better(cand, *best[v])) best[v] = std::move(cand);
    }
  }

  if (!best[dst]) return route;  // unreachable: found stays false
  route.path = best[dst]->path;
  route.miles = best[dst]->dist;
  route.found = true;
  return route;
}

std::vector<double> leg_distances(const RoadGraph& graph,
                                  const std::vector<int>& path) {
  std::vector<double> legs;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    auto miles = graph.edge_miles(path[i], path[i + 1]);
    if (!miles)
      throw Error("path nodes (" + std::to_string(path[i]) + ", " +
                  std::to_string(path[i + 1]) + ") are not adjacent");
    legs.push_back(*miles);
  }
  return legs;
}

}  // namespace gridhaul
