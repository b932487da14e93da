#pragma once

#include <map>
#include <optional>
#include <vector>

#include "gridhaul/grid.hpp"

namespace gridhaul {

// Additional MW/MVAr load at a bus, on top of the case's own loads.
struct PqLoad {
  double p_mw = 0.0;
  double q_mvar = 0.0;
};

// Keyed by bus id. std::map keeps iteration order stable for determinism.
using InjectionMap = std::map<int, PqLoad>;

struct PfOptions {
  double tol = 1e-8;           // max power mismatch, pu
  int max_iter = 30;
  bool flat_start = true;
  bool enforce_q_limits = false;
};

// Any iterate dropping below this magnitude is treated as collapsing;
// iterating further only chases a solution that no longer exists.
inline constexpr double kCollapseVoltageFloor = 0.3;

struct PfSolution {
  std::vector<double> v_mag;   // pu, by bus index
  std::vector<double> v_ang;   // rad
  bool converged = false;
  int iterations = 0;
  double mismatch_norm = 0.0;  // pu, infinity norm
  bool collapsed = false;      // true iff not converged
};

// Warm-start voltages for time-series stepping.
struct PfStart {
  std::vector<double> v_mag;
  std::vector<double> v_ang;
};

// Newton-Raphson power flow in polar form. Divergence is not an error:
// it returns converged=false, collapsed=true with the last iterate kept
// for diagnostics. Structural problems throw before iterating.
PfSolution solve_nr(const Network& net, const InjectionMap& injections,
                    const PfOptions& opts = {},
                    const std::optional<PfStart>& start = std::nullopt);

// Power-balance residual (P then Q per bus, pu) at the given voltages.
// Pure function; used for solver verification.
std::vector<std::pair<double, double>> compute_mismatch(
    const Network& net, const InjectionMap& injections,
    const std::vector<double>& v_mag, const std::vector<double>& v_ang);

// Per-bus magnitudes for export. A collapsed solution reports the
// sentinel at every bus so downstream contours show the collapse.
std::vector<double> export_voltages(const PfSolution& sol,
                                    double collapse_sentinel = 0.01);

}  // namespace gridhaul
