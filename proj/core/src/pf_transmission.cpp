#include "gridhaul/pf_transmission.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace gridhaul {

namespace {

using VecC = Eigen::VectorXcd;
using VecD = Eigen::VectorXd;

struct BusSpec {
  BusKind kind;         // effective kind (PV may be switched to PQ)
  double p_spec = 0.0;  // pu, net scheduled injection
  double q_spec = 0.0;  // pu
  double v_set = 1.0;
  double q_gen_min = 0.0;  // pu, aggregate generator limits
  double q_gen_max = 0.0;
  double q_load = 0.0;  // pu, total load incl. injections
  bool has_gen = false;
};

std::vector<BusSpec> make_specs(const Network& net,
                                const InjectionMap& injections) {
  for (const auto& [bus_id, _] : injections) {
    if (!net.has_bus(bus_id))
      throw Error("injection references unknown bus id " +
                  std::to_string(bus_id));
  }

  const double base = net.base_mva;
  std::vector<BusSpec> specs(net.n_bus());
  for (std::size_t i = 0; i < net.n_bus(); ++i) {
    const auto& b = net.buses[i];
    BusSpec s;
    s.kind = b.kind;
    s.v_set = b.v_set;
    double p_load = b.load_p, q_load = b.load_q;
    if (auto it = injections.find(b.id); it != injections.end()) {
      p_load += it->second.p_mw;
      q_load += it->second.q_mvar;
    }
    s.p_spec = -p_load / base;
    s.q_spec = -q_load / base;
    s.q_load = q_load / base;
    specs[i] = s;
  }
  for (const auto& g : net.generators) {
    auto& s = specs[net.index_of(g.bus)];
    s.p_spec += g.p_set / net.base_mva;
    s.q_gen_min += g.q_min / net.base_mva;
    s.q_gen_max += g.q_max / net.base_mva;
    s.v_set = g.v_set;
    s.has_gen = true;
  }
  return specs;
}

VecC complex_voltages(const std::vector<double>& v_mag,
                      const std::vector<double>& v_ang) {
  VecC v(v_mag.size());
  for (std::size_t i = 0; i < v_mag.size(); ++i)
    v(i) = std::polar(v_mag[i], v_ang[i]);
  return v;
}

// S_calc = diag(V) * conj(Y * V)
VecC calc_injection(const SparseComplex& y, const VecC& v) {
  VecC i = y * v;
  return v.cwiseProduct(i.conjugate());
}

}  // namespace

std::vector<std::pair<double, double>> compute_mismatch(
    const Network& net, const InjectionMap& injections,
    const std::vector<double>& v_mag, const std::vector<double>& v_ang) {
  if (v_mag.size() != net.n_bus() || v_ang.size() != net.n_bus())
    throw Error("voltage vectors must match bus count");

  const auto y = build_admittance(net);
  const auto specs = make_specs(net, injections);
  const VecC v = complex_voltages(v_mag, v_ang);
  const VecC s_calc = calc_injection(y, v);

  // Slack P/Q and PV-bus Q are balanced by generation by definition, so
  // their residuals are reported as zero.
  std::vector<std::pair<double, double>> out(net.n_bus());
  for (std::size_t i = 0; i < net.n_bus(); ++i) {
    const auto& s = specs[i];
    double dp = 0.0, dq = 0.0;
    if (s.kind != BusKind::Slack) dp = s.p_spec - s_calc(i).real();
    if (s.kind == BusKind::PQ) dq = s.q_spec - s_calc(i).imag();
    out[i] = {dp, dq};
  }
  return out;
}

PfSolution solve_nr(const Network& net, const InjectionMap& injections,
                    const PfOptions& opts, const std::optional<PfStart>& start) {
  if (opts.tol <= 0.0) throw Error("PfOptions.tol must be > 0");
  if (opts.max_iter < 1) throw Error("PfOptions.max_iter must be >= 1");

  const auto y = build_admittance(net);
  auto specs = make_specs(net, injections);
  const int n = static_cast<int>(net.n_bus());

  PfSolution sol;
  sol.v_mag.assign(n, 1.0);
  sol.v_ang.assign(n, 0.0);

  if (start && !opts.flat_start) {
    if (start->v_mag.size() != static_cast<std::size_t>(n) ||
        start->v_ang.size() != static_cast<std::size_t>(n))
      throw Error("warm-start vectors must match bus count");
    sol.v_mag = start->v_mag;
    sol.v_ang = start->v_ang;
  }
  // Slack/PV setpoints always override whatever the start supplied.
  for (int i = 0; i < n; ++i) {
    if (specs[i].kind == BusKind::Slack) {
      sol.v_mag[i] = specs[i].v_set;
      sol.v_ang[i] = 0.0;
    } else if (specs[i].kind == BusKind::PV) {
      sol.v_mag[i] = specs[i].v_set;
    }
  }

  VecC v = complex_voltages(sol.v_mag, sol.v_ang);

  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    sol.iterations = iter;

    // Free-variable index maps under the current (possibly switched) kinds.
    std::vector<int> ang_idx, mag_idx;   // buses with free angle / magnitude
    std::vector<int> ang_pos(n, -1), mag_pos(n, -1);
    for (int i = 0; i < n; ++i) {
      if (specs[i].kind != BusKind::Slack) {
        ang_pos[i] = static_cast<int>(ang_idx.size());
        ang_idx.push_back(i);
      }
      if (specs[i].kind == BusKind::PQ) {
        mag_pos[i] = static_cast<int>(mag_idx.size());
        mag_idx.push_back(i);
      }
    }
    const int na = static_cast<int>(ang_idx.size());
    const int nm = static_cast<int>(mag_idx.size());
    const int nu = na + nm;

    const VecC s_calc = calc_injection(y, v);

    VecD f(nu);
    for (int k = 0; k < na; ++k)
      f(k) = specs[ang_idx[k]].p_spec - s_calc(ang_idx[k]).real();
    for (int k = 0; k < nm; ++k)
      f(na + k) = specs[mag_idx[k]].q_spec - s_calc(mag_idx[k]).imag();

    sol.mismatch_norm = (nu == 0) ? 0.0 : f.cwiseAbs().maxCoeff();

    if (sol.mismatch_norm <= opts.tol) {
      if (opts.enforce_q_limits) {
        // Check PV generator reactive output; pin violators to the limit
        // and keep iterating as PQ.
        bool switched = false;
        for (int i = 0; i < n; ++i) {
          auto& s = specs[i];
          if (s.kind != BusKind::PV || !s.has_gen) continue;
          const double q_gen = s_calc(i).imag() + s.q_load;
          if (q_gen > s.q_gen_max + 1e-12) {
            s.kind = BusKind::PQ;
            s.q_spec = s.q_gen_max - s.q_load;
            switched = true;
          } else if (q_gen < s.q_gen_min - 1e-12) {
            s.kind = BusKind::PQ;
            s.q_spec = s.q_gen_min - s.q_load;
            switched = true;
          }
        }
        if (switched) continue;
      }
      sol.converged = true;
      break;
    }
    if (nu == 0) {
      sol.converged = true;
      break;
    }

    // Jacobian in polar form, pattern-matched to Y-bus sparsity.
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(4 * static_cast<std::size_t>(y.nonZeros()));
    for (int col = 0; col < y.outerSize(); ++col) {
      for (SparseComplex::InnerIterator it(y, col); it; ++it) {
        const int i = static_cast<int>(it.row());
        const int j = static_cast<int>(it.col());
        const double g = it.value().real();
        const double b = it.value().imag();
        const double vi = std::abs(v(i));
        const double vj = std::abs(v(j));
        const double ti = std::arg(v(i));
        const double tj = std::arg(v(j));

        double dP_dt, dP_dv, dQ_dt, dQ_dv;
        if (i == j) {
          const double p = s_calc(i).real();
          const double q = s_calc(i).imag();
          dP_dt = -q - b * vi * vi;
          dP_dv = p / vi + g * vi;
          dQ_dt = p - g * vi * vi;
          dQ_dv = q / vi - b * vi;
        } else {
          const double dt = ti - tj;
          const double c = std::cos(dt), s = std::sin(dt);
          dP_dt = vi * vj * (g * s - b * c);
          dP_dv = vi * (g * c + b * s);
          dQ_dt = -vi * vj * (g * c + b * s);
          dQ_dv = vi * (g * s - b * c);
        }

        if (ang_pos[i] >= 0 && ang_pos[j] >= 0)
          trip.emplace_back(ang_pos[i], ang_pos[j], dP_dt);
        if (ang_pos[i] >= 0 && mag_pos[j] >= 0)
          trip.emplace_back(ang_pos[i], na + mag_pos[j], dP_dv);
        if (mag_pos[i] >= 0 && ang_pos[j] >= 0)
          trip.emplace_back(na + mag_pos[i], ang_pos[j], dQ_dt);
        if (mag_pos[i] >= 0 && mag_pos[j] >= 0)
          trip.emplace_back(na + mag_pos[i], na + mag_pos[j], dQ_dv);
      }
    }
    Eigen::SparseMatrix<double> jac(nu, nu);
    jac.setFromTriplets(trip.begin(), trip.end());
    jac.makeCompressed();

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(jac);
    if (lu.info() != Eigen::Success) break;  // singular: collapse
    VecD dx = lu.solve(f);
    if (lu.info() != Eigen::Success || !dx.allFinite()) break;

    bool floor_hit = false;
    for (int k = 0; k < na; ++k) {
      const int i = ang_idx[k];
      v(i) = std::polar(std::abs(v(i)), std::arg(v(i)) + dx(k));
    }
    for (int k = 0; k < nm; ++k) {
      const int i = mag_idx[k];
      const double vm = std::abs(v(i)) + dx(na + k);
      if (vm < kCollapseVoltageFloor) floor_hit = true;
      v(i) = std::polar(vm, std::arg(v(i)));
    }
    if (floor_hit) {
      sol.iterations = iter;
      break;
    }
  }

  for (int i = 0; i < n; ++i) {
    sol.v_mag[i] = std::abs(v(i));
    sol.v_ang[i] = std::arg(v(i));
  }
  sol.collapsed = !sol.converged;
  return sol;
}

std::vector<double> export_voltages(const PfSolution& sol,
                                    double collapse_sentinel) {
  if (!sol.collapsed) return sol.v_mag;
  return std::vector<double>(sol.v_mag.size(), collapse_sentinel);
}

}  // namespace gridhaul
