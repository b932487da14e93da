#include "gridhaul/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gridhaul {

ViolationReport count_violations(const std::vector<double>& v_mag,
                                 const ViolationBand& band) {
  if (band.lower <= 0.0 || band.lower >= band.upper)
    throw Error("violation band requires 0 < lower < upper");
  ViolationReport rep;
  for (std::size_t i = 0; i < v_mag.size(); ++i) {
    if (!std::isfinite(v_mag[i]))
      throw Error("non-finite voltage at bus index " + std::to_string(i));
    if (v_mag[i] < band.lower || v_mag[i] > band.upper)
      rep.bus_indices.push_back(static_cast<int>(i));
  }
  rep.count = static_cast<int>(rep.bus_indices.size());
  return rep;
}

namespace {

double median_sorted(const std::vector<double>& s) {
  const std::size_t n = s.size();
  return n % 2 == 1 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

}  // namespace

SummaryStats summarize(const std::vector<double>& series) {
  if (series.empty()) throw Error("cannot summarize an empty series");

  std::vector<double> s = series;
  std::sort(s.begin(), s.end());

  SummaryStats st;
  st.minimum = s.front();
  st.maximum = s.back();
  st.median = median_sorted(s);
  st.mean = std::accumulate(s.begin(), s.end(), 0.0) / s.size();
  double ss = 0.0;
  for (double v : s) ss += (v - st.mean) * (v - st.mean);
  st.std_dev = std::sqrt(ss / s.size());
  return st;
}

std::map<std::int64_t, std::size_t> histogram(const std::vector<double>& series,
                                              double bin_width) {
  if (bin_width <= 0.0) throw Error("bin_width must be > 0");
  std::map<std::int64_t, std::size_t> bins;
  for (double v : series)
    ++bins[static_cast<std::int64_t>(std::floor(v / bin_width))];
  return bins;
}

std::map<std::int64_t, FleetBinStats> violations_vs_fleet(
    const std::vector<std::pair<int, int>>& charging_and_violations,
    int fleet_bin_width) {
  if (charging_and_violations.empty())
    throw Error("no records to bin");
  if (fleet_bin_width <= 0) throw Error("fleet_bin_width must be > 0");

  std::map<std::int64_t, std::vector<double>> grouped;
  for (const auto& [n_charging, n_violations] : charging_and_violations) {
    const std::int64_t bin =
        static_cast<std::int64_t>(n_charging / fleet_bin_width) *
        fleet_bin_width;
    grouped[bin].push_back(static_cast<double>(n_violations));
  }

  std::map<std::int64_t, FleetBinStats> out;
  for (auto& [bin, vals] : grouped) {
    std::sort(vals.begin(), vals.end());
    out[bin] = {median_sorted(vals), vals.back()};
  }
  return out;
}

}  // namespace gridhaul
