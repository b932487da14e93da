#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gridhaul/grid.hpp"

namespace gridhaul {

struct ViolationBand {
  double lower = 0.95;
  double upper = 1.05;
};

struct ViolationReport {
  int count = 0;
  std::vector<int> bus_indices;
};

// A bus violates iff v < lower or v > upper (strict: 0.95 exactly is fine).
ViolationReport count_violations(const std::vector<double>& v_mag,
                                 const ViolationBand& band = {});

struct SummaryStats {
  double minimum = 0.0;
  double maximum = 0.0;
  double median = 0.0;
  double mean = 0.0;
  double std_dev = 0.0;  // population
};

SummaryStats summarize(const std::vector<double>& series);

// Half-open bins [k*w, (k+1)*w) keyed by k; counts sum to series length.
std::map<std::int64_t, std::size_t> histogram(const std::vector<double>& series,
                                              double bin_width);

struct FleetBinStats {
  double median = 0.0;
  double max = 0.0;
};

// Records grouped by n_charging into bins of the given width; per bin the
// median and maximum violation count. Empty bins are absent, not zero.
// Keyed by the bin's lower edge in vehicles.
std::map<std::int64_t, FleetBinStats> violations_vs_fleet(
    const std::vector<std::pair<int, int>>& charging_and_violations,
    int fleet_bin_width);

}  // namespace gridhaul
