#include <doctest.h>

#include <cmath>

#include "gridhaul/io.hpp"
#include "gridhaul/pf_transmission.hpp"
#include "gridhaul/rng.hpp"
#include "oracles.hpp"

using namespace gridhaul;

namespace {

Network lossless_ring(int n_bus) {
  Network net;
  net.base_mva = 100.0;
  for (int i = 1; i <= n_bus; ++i)
    net.buses.push_back({.id = i,
                         .kind = i == 1 ? BusKind::Slack : BusKind::PQ,
                         .base_kv = 138.0});
  for (int i = 1; i <= n_bus; ++i)
    net.branches.push_back({.from_bus = i,
                            .to_bus = i % n_bus + 1,
                            .r = 0.0,
                            .x = 0.08});
  return net;
}

// Hand-built suite for the Gauss-Seidel cross-check.
std::vector<Network> oracle_suite() {
  std::vector<Network> suite;

  suite.push_back(io::load_network(std::string(GRIDHAUL_DATA_DIR) +
                                   "/case2_loaded.json"));
  suite.push_back(
      io::load_network(std::string(GRIDHAUL_DATA_DIR) + "/case3.json"));

  {  // 5-bus mesh with a PV bus, tap transformer and shunt
    Network net;
    net.base_mva = 100.0;
    net.buses = {
        {.id = 1, .kind = BusKind::Slack, .base_kv = 230.0, .v_set = 1.02},
        {.id = 2, .kind = BusKind::PV, .base_kv = 230.0, .v_set = 1.01,
         .load_p = 20.0, .load_q = 10.0},
        {.id = 3, .kind = BusKind::PQ, .base_kv = 230.0, .load_p = 45.0,
         .load_q = 15.0},
        {.id = 4, .kind = BusKind::PQ, .base_kv = 115.0, .load_p = 40.0,
         .load_q = 5.0, .shunt_b = 0.1},
        {.id = 5, .kind = BusKind::PQ, .base_kv = 115.0, .load_p = 60.0,
         .load_q = 10.0},
    };
    net.branches = {
        {.from_bus = 1, .to_bus = 2, .r = 0.02, .x = 0.06, .b_charging = 0.06},
        {.from_bus = 1, .to_bus = 3, .r = 0.08, .x = 0.24, .b_charging = 0.05},
        {.from_bus = 2, .to_bus = 3, .r = 0.06, .x = 0.18, .b_charging = 0.04},
        {.from_bus = 3, .to_bus = 4, .r = 0.01, .x = 0.08, .tap = 0.98},
        {.from_bus = 4, .to_bus = 5, .r = 0.03, .x = 0.09},
        {.from_bus = 2, .to_bus = 5, .r = 0.04, .x = 0.12, .tap = 1.02},
    };
    net.generators = {
        {.bus = 1, .p_set = 0.0, .v_set = 1.02},
        {.bus = 2, .p_set = 40.0, .q_min = -300.0, .q_max = 300.0,
         .v_set = 1.01},
    };
    suite.push_back(net);
  }

  {  // 7-bus radial feeder-shaped case
    Network net;
    net.base_mva = 100.0;
    for (int i = 1; i <= 7; ++i)
      net.buses.push_back({.id = i,
                           .kind = i == 1 ? BusKind::Slack : BusKind::PQ,
                           .base_kv = 69.0,
                           .load_p = i > 1 ? 8.0 : 0.0,
                           .load_q = i > 1 ? 2.5 : 0.0});
    for (int i = 1; i < 7; ++i)
      net.branches.push_back(
          {.from_bus = i, .to_bus = i + 1, .r = 0.02, .x = 0.05});
    suite.push_back(net);
  }

  {  // 10-bus ring with moderate loads
    Network net = lossless_ring(10);
    for (auto& b : net.buses) {
      if (b.kind == BusKind::PQ) {
        b.load_p = 10.0;
        b.load_q = 3.0;
      }
    }
    for (auto& br : net.branches) br.r = 0.02;
    suite.push_back(net);
  }

  return suite;
}

// Two-bus closed form: slack 1.0 pu, lossless reactance x, PQ load p + jq
// (pu). |V2|^2 is a root of v^4 + (2 q x - 1) v^2 + x^2 (p^2 + q^2) = 0.
struct TwoBusAnalytic {
  bool solvable;
  double v_mag;
  double v_ang;
};

TwoBusAnalytic two_bus_closed_form(double x, double p, double q) {
  const double b = 2.0 * q * x - 1.0;
  const double c = x * x * (p * p + q * q);
  const double disc = b * b - 4.0 * c;
  if (disc < 0.0) return {false, 0.0, 0.0};
  const double v2 = (-b + std::sqrt(disc)) / 2.0;  // high-voltage root
  const double v = std::sqrt(v2);
  const double ang = std::asin(-p * x / v);
  return {true, v, ang};
}

}  // namespace

TEST_CASE("flat case converges immediately") {
  auto net = lossless_ring(4);
  const auto sol = solve_nr(net, {});
  REQUIRE(sol.converged);
  CHECK(sol.iterations == 1);
  for (double v : sol.v_mag) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  for (double a : sol.v_ang) CHECK(std::abs(a) < 1e-12);
}

TEST_CASE("two-bus solution matches the closed form to 1e-8") {
  const auto net = io::load_network(std::string(GRIDHAUL_DATA_DIR) +
                                    "/case2_loaded.json");
  const auto expect = two_bus_closed_form(0.1, 1.0, 0.0);
  REQUIRE(expect.solvable);

  const auto sol = solve_nr(net, {});
  REQUIRE(sol.converged);
  CHECK(sol.v_mag[1] == doctest::Approx(expect.v_mag).epsilon(1e-8));
  CHECK(sol.v_ang[1] == doctest::Approx(expect.v_ang).epsilon(1e-8));
}

TEST_CASE("load beyond the transfer limit collapses") {
  auto net = io::load_network(std::string(GRIDHAUL_DATA_DIR) +
                              "/case2_loaded.json");
  // Transfer limit for x=0.1, q=0 is p = 1/(2x) = 5 pu: discriminant < 0.
  CHECK_FALSE(two_bus_closed_form(0.1, 6.0, 0.0).solvable);

  net.buses[1].load_p = 600.0;  // 6 pu
  const auto sol = solve_nr(net, {});
  CHECK_FALSE(sol.converged);
  CHECK(sol.collapsed);

  const auto v = export_voltages(sol);
  for (double vm : v) CHECK(vm == 0.01);
  const auto v5 = export_voltages(sol, 0.05);
  for (double vm : v5) CHECK(vm == 0.05);
}

TEST_CASE("export_voltages passes converged solutions through") {
  const auto net = io::load_network(std::string(GRIDHAUL_DATA_DIR) +
                                    "/case2_loaded.json");
  const auto sol = solve_nr(net, {});
  REQUIRE(sol.converged);
  CHECK(export_voltages(sol) == sol.v_mag);
}

TEST_CASE("NR agrees with the Gauss-Seidel oracle on the hand-built suite") {
  const auto suite = oracle_suite();
  REQUIRE(suite.size() >= 5);
  for (const auto& net : suite) {
    const auto nr = solve_nr(net, {});
    REQUIRE(nr.converged);
    CHECK(nr.mismatch_norm <= 1e-8);

    const auto gs = oracles::gauss_seidel(net, {});
    REQUIRE(gs.converged);
    for (std::size_t i = 0; i < net.n_bus(); ++i) {
      CHECK(std::abs(nr.v_mag[i] - gs.v_mag[i]) < 1e-6);
      CHECK(std::abs(nr.v_ang[i] - gs.v_ang[i]) < 1e-6);
    }
  }
}

TEST_CASE("residual check on every converged suite member") {
  for (const auto& net : oracle_suite()) {
    const auto sol = solve_nr(net, {});
    REQUIRE(sol.converged);
    double norm = 0.0;
    for (const auto& [dp, dq] : compute_mismatch(net, {}, sol.v_mag, sol.v_ang))
      norm = std::max({norm, std::abs(dp), std::abs(dq)});
    CHECK(norm <= 1e-8);
  }
}

TEST_CASE("compute_mismatch equals the hand-computed two-bus residual") {
  const auto net = io::load_network(std::string(GRIDHAUL_DATA_DIR) +
                                    "/case2_loaded.json");
  // Perturbed voltages; residual from the power-balance equations by hand:
  // S2 = V2 conj(Y21 V1 + Y22 V2), spec P2 = -1, Q2 = 0.
  const std::vector<double> v_mag{1.0, 0.97};
  const std::vector<double> v_ang{0.0, -0.08};
  const Complex v1 = std::polar(1.0, 0.0);
  const Complex v2 = std::polar(0.97, -0.08);
  const Complex y21(0.0, 10.0), y22(0.0, -10.0);
  const Complex s2 = v2 * std::conj(y21 * v1 + y22 * v2);

  const auto mm = compute_mismatch(net, {}, v_mag, v_ang);
  CHECK(mm[1].first == doctest::Approx(-1.0 - s2.real()).epsilon(1e-12));
  CHECK(mm[1].second == doctest::Approx(0.0 - s2.imag()).epsilon(1e-12));
  // Slack entries are balanced by definition.
  CHECK(mm[0].first == 0.0);
  CHECK(mm[0].second == 0.0);
}

TEST_CASE("compute_mismatch rejects wrong dimensions") {
  const auto net = io::load_network(std::string(GRIDHAUL_DATA_DIR) +
                                    "/case2_loaded.json");
  CHECK_THROWS_AS(compute_mismatch(net, {}, {1.0}, {0.0, 0.0}), Error);
}

TEST_CASE("determinism: identical inputs give bitwise-identical solutions") {
  const auto net =
      io::load_network(std::string(GRIDHAUL_DATA_DIR) + "/case30.json");
  InjectionMap inj;
  inj[10].p_mw = 55.0;
  const auto a = solve_nr(net, inj);
  const auto b = solve_nr(net, inj);
  CHECK(a.v_mag == b.v_mag);
  CHECK(a.v_ang == b.v_ang);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("monotone stress response on the bundled radial network") {
  const auto net =
      io::load_network(std::string(GRIDHAUL_DATA_DIR) + "/case30.json");
  double prev_min = 2.0;
  for (double k = 1.0; k <= 3.0; k += 0.2) {
    InjectionMap inj;
    for (const auto& b : net.buses)
      inj[b.id] = {b.load_p * (k - 1.0), b.load_q * (k - 1.0)};
    const auto sol = solve_nr(net, inj);
    if (!sol.converged) break;  // collapse ends the monotone regime
    double vmin = 2.0;
    for (double v : sol.v_mag) vmin = std::min(vmin, v);
    CHECK(vmin <= prev_min + 1e-12);
    prev_min = vmin;
  }
}

TEST_CASE("unknown injection bus is rejected before iterating") {
  const auto net = io::load_network(std::string(GRIDHAUL_DATA_DIR) +
                                    "/case2_loaded.json");
  InjectionMap inj;
  inj[42].p_mw = 1.0;
  CHECK_THROWS_AS(solve_nr(net, inj), Error);
}

TEST_CASE("Q-limit enforcement converts a binding PV bus to PQ") {
  Network net;
  net.base_mva = 100.0;
  net.buses = {
      {.id = 1, .kind = BusKind::Slack, .base_kv = 230.0, .v_set = 1.0},
      {.id = 2, .kind = BusKind::PV, .base_kv = 230.0, .v_set = 1.05},
      {.id = 3, .kind = BusKind::PQ, .base_kv = 230.0, .load_p = 80.0,
       .load_q = 60.0},
  };
  net.branches = {
      {.from_bus = 1, .to_bus = 2, .r = 0.01, .x = 0.05},
      {.from_bus = 2, .to_bus = 3, .r = 0.01, .x = 0.05},
  };
  net.generators = {
      {.bus = 1, .v_set = 1.0},
      {.bus = 2, .p_set = 40.0, .q_min = -5.0, .q_max = 5.0, .v_set = 1.05},
  };

  PfOptions off;
  const auto unlimited = solve_nr(net, {}, off);
  REQUIRE(unlimited.converged);
  CHECK(unlimited.v_mag[1] == doctest::Approx(1.05).epsilon(1e-9));

  PfOptions on;
  on.enforce_q_limits = true;
  const auto limited = solve_nr(net, {}, on);
  REQUIRE(limited.converged);
  // With only 5 MVAr available the PV bus cannot hold 1.05.
  CHECK(limited.v_mag[1] < 1.05);

  // Reactive output sits at the limit: Q_gen = Q_inj + Q_load = 5 MVAr.
  const auto y = build_admittance(net);
  Complex i2 = 0.0;
  for (int j = 0; j < 3; ++j)
    i2 += y.coeff(1, j) * std::polar(limited.v_mag[j], limited.v_ang[j]);
  const Complex s2 =
      std::polar(limited.v_mag[1], limited.v_ang[1]) * std::conj(i2);
  CHECK(s2.imag() * net.base_mva == doctest::Approx(5.0).epsilon(1e-6));
}

TEST_CASE("warm start reaches the same solution as flat start") {
  const auto net =
      io::load_network(std::string(GRIDHAUL_DATA_DIR) + "/case30.json");
  InjectionMap inj;
  inj[17].p_mw = 80.0;

  const auto flat = solve_nr(net, inj);
  REQUIRE(flat.converged);

  // Warm-start from a nearby operating point.
  InjectionMap nearby = inj;
  nearby[17].p_mw = 75.0;
  const auto prev = solve_nr(net, nearby);
  PfOptions warm_opts;
  warm_opts.flat_start = false;
  const auto warm =
      solve_nr(net, inj, warm_opts, PfStart{prev.v_mag, prev.v_ang});
  REQUIRE(warm.converged);
  for (std::size_t i = 0; i < net.n_bus(); ++i)
    CHECK(std::abs(warm.v_mag[i] - flat.v_mag[i]) < 1e-8);
  CHECK(warm.iterations <= flat.iterations);
}
