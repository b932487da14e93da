#include "gridhaul/pf_distribution.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <queue>
#include <unordered_map>

#include "gridhaul/rng.hpp"

namespace gridhaul {

int Feeder::index_of(int node_id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id == node_id) return static_cast<int>(i);
  }
  throw Error("unknown feeder node id " + std::to_string(node_id));
}

bool Feeder::has_node(int node_id) const {
  for (const auto& n : nodes) {
    if (n.id == node_id) return true;
  }
  return false;
}

SweepOrder order_radial(const Feeder& feeder) {
  const int n = static_cast<int>(feeder.n_node());
  const int src = feeder.index_of(feeder.source_node);

  std::vector<std::vector<std::pair<int, int>>> adj(n);  // (neighbor, line)
  for (std::size_t li = 0; li < feeder.lines.size(); ++li) {
    const auto& l = feeder.lines[li];
    const int a = feeder.index_of(l.from);
    const int b = feeder.index_of(l.to);
    adj[a].emplace_back(b, static_cast<int>(li));
    adj[b].emplace_back(a, static_cast<int>(li));
  }

  SweepOrder order;
  order.parent.assign(n, -1);
  order.parent_line.assign(n, -1);
  std::vector<bool> seen(n, false);

  std::queue<int> q;
  q.push(src);
  seen[src] = true;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    order.forward.push_back(u);
    for (const auto& [v, li] : adj[u]) {
      if (li == order.parent_line[u]) continue;
      if (seen[v]) {
        const auto& l = feeder.lines[li];
        throw Error("feeder is not radial: edge (" + std::to_string(l.from) +
                    ", " + std::to_string(l.to) + ") closes a cycle");
      }
      seen[v] = true;
      order.parent[v] = u;
      order.parent_line[v] = li;
      q.push(v);
    }
  }

  for (int i = 0; i < n; ++i) {
    if (!seen[i])
      throw Error("feeder node " + std::to_string(feeder.nodes[i].id) +
                  " is not reachable from the source");
  }
  return order;
}

std::vector<int> candidate_nodes(const Feeder& feeder) {
  if (!feeder.candidate_station_nodes.empty()) {
    for (int id : feeder.candidate_station_nodes) feeder.index_of(id);
    return feeder.candidate_station_nodes;
  }
  std::vector<int> out;
  for (const auto& n : feeder.nodes) {
    if (n.id != feeder.source_node) out.push_back(n.id);
  }
  return out;
}

namespace {

void check_placement(const Feeder& feeder, const StationPlacement& p) {
  if (p.station_nodes.size() != p.vehicles_per_station.size())
    throw Error("placement lists have mismatched lengths");
  for (std::size_t i = 0; i < p.station_nodes.size(); ++i) {
    feeder.index_of(p.station_nodes[i]);
    if (p.vehicles_per_station[i] < 0)
      throw Error("negative vehicle count at station node " +
                  std::to_string(p.station_nodes[i]));
  }
}

// Node loads in pu, station loads folded in.
std::vector<Complex> node_loads_pu(const Feeder& feeder,
                                   const StationPlacement& p,
                                   double reactive_fraction) {
  std::vector<Complex> s(feeder.n_node());
  const double kw_to_pu = 1.0 / (1000.0 * feeder.base_mva);
  for (std::size_t i = 0; i < feeder.n_node(); ++i)
    s[i] = Complex(feeder.nodes[i].load_p, feeder.nodes[i].load_q) * kw_to_pu;
  for (std::size_t k = 0; k < p.station_nodes.size(); ++k) {
    const double kw = p.vehicles_per_station[k] * p.per_vehicle_kw;
    s[feeder.index_of(p.station_nodes[k])] +=
        Complex(kw, kw * reactive_fraction) * kw_to_pu;
  }
  return s;
}

Complex line_impedance_pu(const Feeder& feeder, const FeederLine& l) {
  Complex z(l.r, l.x);
  if (feeder.impedance_unit == ImpedanceUnit::Ohm) {
    const double z_base = feeder.base_kv * feeder.base_kv / feeder.base_mva;
    z /= z_base;
  }
  return z;
}

}  // namespace

FbsSolution solve_fbs(const Feeder& feeder, const StationPlacement& placement,
                      double tol, int max_iter, double reactive_fraction) {
  check_placement(feeder, placement);
  const auto order = order_radial(feeder);
  const int n = static_cast<int>(feeder.n_node());
  const int src = feeder.index_of(feeder.source_node);

  const auto s_load = node_loads_pu(feeder, placement, reactive_fraction);
  std::vector<Complex> z_line(feeder.lines.size());
  for (std::size_t li = 0; li < feeder.lines.size(); ++li)
    z_line[li] = line_impedance_pu(feeder, feeder.lines[li]);

  std::vector<Complex> v(n, Complex(feeder.source_v, 0.0));
  std::vector<Complex> i_branch(n);  // current into node via its parent line

  FbsSolution sol;
  for (int iter = 1; iter <= max_iter; ++iter) {
    sol.iterations = iter;

    // Backward: aggregate load currents from the leaves up.
    for (int k = n - 1; k >= 0; --k) {
      const int u = order.forward[k];
      i_branch[u] = std::conj(s_load[u] / v[u]);
    }
    for (int k = n - 1; k >= 1; --k) {
      const int u = order.forward[k];
      i_branch[order.parent[u]] += i_branch[u];
    }

    // Forward: voltage drops from the source down.
    double max_dv = 0.0;
    for (int k = 1; k < n; ++k) {
      const int u = order.forward[k];
      const Complex v_new =
          v[order.parent[u]] - z_line[order.parent_line[u]] * i_branch[u];
      max_dv = std::max(max_dv, std::abs(v_new - v[u]));
      v[u] = v_new;
    }

    if (!std::isfinite(max_dv)) break;
    if (max_dv < tol) {
      sol.converged = true;
      break;
    }
  }

  sol.v_mag.resize(n);
  for (int i = 0; i < n; ++i)
    sol.v_mag[i] = std::isfinite(std::abs(v[i])) ? std::abs(v[i]) : 0.0;
  (void)src;
  return sol;
}

StationPlacement sample_placement(const Feeder& feeder, int n_stations,
                                  int n_vehicles, std::uint64_t seed,
                                  double per_vehicle_kw) {
  if (n_stations < 0 || n_vehicles < 0)
    throw Error("n_stations and n_vehicles must be nonnegative");
  auto candidates = candidate_nodes(feeder);
  if (static_cast<std::size_t>(n_stations) > candidates.size())
    throw Error("n_stations (" + std::to_string(n_stations) +
                ") exceeds candidate node count (" +
                std::to_string(candidates.size()) + ")");

  Rng rng(seed);
  StationPlacement p;
  p.per_vehicle_kw = per_vehicle_kw;

  // Partial Fisher-Yates: first n_stations entries drawn without replacement.
  for (int k = 0; k < n_stations; ++k) {
    const std::size_t j =
        k + static_cast<std::size_t>(rng.uniform_below(candidates.size() - k));
    std::swap(candidates[k], candidates[j]);
    p.station_nodes.push_back(candidates[k]);
  }
  p.vehicles_per_station.assign(p.station_nodes.size(), 0);

  if (n_stations > 0) {
    for (int i = 0; i < n_vehicles; ++i)
      ++p.vehicles_per_station[rng.uniform_below(
          static_cast<std::uint64_t>(n_stations))];
  }
  return p;
}

Network feeder_to_network(const Feeder& feeder,
                          const StationPlacement& placement,
                          double reactive_fraction) {
  check_placement(feeder, placement);
  Network net;
  net.base_mva = feeder.base_mva;

  const auto s_load = node_loads_pu(feeder, placement, reactive_fraction);
  for (std::size_t i = 0; i < feeder.n_node(); ++i) {
    Bus b;
    b.id = feeder.nodes[i].id;
    b.kind = feeder.nodes[i].id == feeder.source_node ? BusKind::Slack
                                                      : BusKind::PQ;
    b.base_kv = feeder.base_kv;
    b.v_set = feeder.source_v;
    b.load_p = s_load[i].real() * feeder.base_mva;
    b.load_q = s_load[i].imag() * feeder.base_mva;
    net.buses.push_back(b);
  }
  for (const auto& l : feeder.lines) {
    const Complex z = line_impedance_pu(feeder, l);
    Branch br;
    br.from_bus = l.from;
    br.to_bus = l.to;
    br.r = z.real();
    br.x = z.imag();
    net.branches.push_back(br);
  }
  return net;
}

}  // namespace gridhaul
