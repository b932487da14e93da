#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

namespace gridhaul {

// Structural errors (bad files, invalid models, unknown ids) throw this.
// Numerical outcomes (divergence, collapse) never do; they are flags.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Complex = std::complex<double>;
using SparseComplex = Eigen::SparseMatrix<Complex>;

enum class BusKind { Slack, PV, PQ };

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
};

struct Bus {
  int id = 0;
  BusKind kind = BusKind::PQ;
  double base_kv = 0.0;
  double v_set = 1.0;       // pu, meaningful for Slack/PV
  double load_p = 0.0;      // MW
  double load_q = 0.0;      // MVAr
  double shunt_g = 0.0;     // pu
  double shunt_b = 0.0;     // pu
  std::optional<GeoPoint> coord;
};

struct Branch {
  int from_bus = 0;
  int to_bus = 0;
  double r = 0.0;           // pu
  double x = 0.0;           // pu
  double b_charging = 0.0;  // pu, total line charging
  double tap = 1.0;
  double shift = 0.0;       // rad
  bool in_service = true;
};

struct Generator {
  int bus = 0;
  double p_set = 0.0;   // MW
  double q_min = -1e9;  // MVAr
  double q_max = 1e9;   // MVAr
  double v_set = 1.0;   // pu
};

class Network {
 public:
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Generator> generators;

  std::size_t n_bus() const { return buses.size(); }

  // Dense index of a bus id, or throws.
  int index_of(int bus_id) const;
  bool has_bus(int bus_id) const;
  const Bus& bus(int bus_id) const { return buses[index_of(bus_id)]; }
};

struct Violation {
  std::string what;  // human-readable, names the offending bus/branch
};

// Collects every invariant violation; empty report means valid.
// Checks: unique bus ids, exactly one slack, finite loads, base_kv > 0,
// branch endpoints exist, from != to, nonzero series impedance, tap > 0,
// generator bus kinds, q limits ordered, connectivity over in-service
// branches.
std::vector<Violation> validate(const Network& net);

// Throws Error listing the first few violations if the network is invalid.
void require_valid(const Network& net);

// Standard Y-bus. Off-nominal tap on the from side, phase shift in the
// off-diagonal terms, half of b_charging on each end, bus shunts on the
// diagonal. Out-of-service branches contribute nothing.
SparseComplex build_admittance(const Network& net);

}  // namespace gridhaul
