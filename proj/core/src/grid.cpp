#include "gridhaul/grid.hpp"

#include <cmath>
#include <queue>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace gridhaul {

int Network::index_of(int bus_id) const {
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].id == bus_id) return static_cast<int>(i);
  }
  throw Error("unknown bus id " + std::to_string(bus_id));
}

bool Network::has_bus(int bus_id) const {
  for (const auto& b : buses) {
    if (b.id == bus_id) return true;
  }
  return false;
}

std::vector<Violation> validate(const Network& net) {
  std::vector<Violation> out;
  auto add = [&out](const std::string& s) { out.push_back({s}); };

  if (net.base_mva <= 0.0) add("base_mva must be > 0");

  std::unordered_set<int> ids;
  int n_slack = 0;
  for (const auto& b : net.buses) {
    if (!ids.insert(b.id).second)
      add("duplicate bus id " + std::to_string(b.id));
    if (b.kind == BusKind::Slack) ++n_slack;
    if (b.base_kv <= 0.0)
      add("bus " + std::to_string(b.id) + ": base_kv must be > 0");
    if (!std::isfinite(b.load_p) || !std::isfinite(b.load_q))
      add("bus " + std::to_string(b.id) + ": load_p/load_q must be finite");
  }
  if (n_slack == 0 && !net.buses.empty()) add("no slack bus");
  if (n_slack > 1)
    add("multiple slack buses (" + std::to_string(n_slack) + ")");

  for (std::size_t i = 0; i < net.branches.size(); ++i) {
    const auto& br = net.branches[i];
    const std::string tag = "branch " + std::to_string(i);
    if (!ids.count(br.from_bus))
      add(tag + ": from_bus " + std::to_string(br.from_bus) +
          " does not exist");
    if (!ids.count(br.to_bus))
      add(tag + ": to_bus " + std::to_string(br.to_bus) + " does not exist");
    if (br.from_bus == br.to_bus)
      add(tag + ": from_bus equals to_bus (" + std::to_string(br.from_bus) +
          ")");
    if (br.in_service && br.r == 0.0 && br.x == 0.0)
      add(tag + ": in-service branch has zero series impedance");
    if (br.tap <= 0.0) add(tag + ": tap must be > 0");
  }

  for (std::size_t i = 0; i < net.generators.size(); ++i) {
    const auto& g = net.generators[i];
    const std::string tag = "generator " + std::to_string(i);
    if (!ids.count(g.bus)) {
      add(tag + ": bus " + std::to_string(g.bus) + " does not exist");
      continue;
    }
    if (g.q_min > g.q_max) add(tag + ": q_min > q_max");
    for (const auto& b : net.buses) {
      if (b.id == g.bus && b.kind == BusKind::PQ)
        add(tag + ": generator bus " + std::to_string(g.bus) +
            " must be Slack or PV");
    }
  }

  // Connectivity over in-service branches; islands are rejected.
  if (!net.buses.empty() && ids.size() == net.buses.size()) {
    std::unordered_map<int, std::vector<int>> adj;
    for (const auto& br : net.branches) {
      if (!br.in_service) continue;
      if (!ids.count(br.from_bus) || !ids.count(br.to_bus)) continue;
      adj[br.from_bus].push_back(br.to_bus);
      adj[br.to_bus].push_back(br.from_bus);
    }
    std::unordered_set<int> seen;
    std::queue<int> q;
    q.push(net.buses.front().id);
    seen.insert(net.buses.front().id);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : adj[u]) {
        if (seen.insert(v).second) q.push(v);
      }
    }
    if (seen.size() != net.buses.size()) {
      std::ostringstream os;
      os << "network is islanded: " << net.buses.size() - seen.size()
         << " bus(es) unreachable, e.g. bus ";
      for (const auto& b : net.buses) {
        if (!seen.count(b.id)) {
          os << b.id;
          break;
        }
      }
      add(os.str());
    }
  }

  return out;
}

void require_valid(const Network& net) {
  auto report = validate(net);
  if (report.empty()) return;
  std::ostringstream os;
  os << "invalid network:";
  std::size_t shown = 0;
  for (const auto& v : report) {
    os << "\n  - " << v.what;
    if (++shown == 5 && report.size() > 5) {
      os << "\n  ... and " << report.size() - 5 << " more";
      break;
    }
  }
  throw Error(os.str());
}

SparseComplex build_admittance(const Network& net) {
  require_valid(net);
  const int n = static_cast<int>(net.n_bus());

  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(4 * net.branches.size() + net.buses.size());

  for (const auto& br : net.branches) {
    if (!br.in_service) continue;
    const int i = net.index_of(br.from_bus);
    const int j = net.index_of(br.to_bus);
    const Complex ys = 1.0 / Complex(br.r, br.x);
    const Complex ysh(0.0, br.b_charging / 2.0);
    const Complex t = std::polar(br.tap, br.shift);

    trip.emplace_back(i, i, (ys + ysh) / (br.tap * br.tap));
    trip.emplace_back(j, j, ys + ysh);
    trip.emplace_back(i, j, -ys / std::conj(t));
    trip.emplace_back(j, i, -ys / t);
  }
  for (int k = 0; k < n; ++k) {
    const auto& b = net.buses[k];
    if (b.shunt_g != 0.0 || b.shunt_b != 0.0)
      trip.emplace_back(k, k, Complex(b.shunt_g, b.shunt_b));
  }

  SparseComplex y(n, n);
  y.setFromTriplets(trip.begin(), trip.end());
  return y;
}

}  // namespace gridhaul
