#pragma once

#include <string>
#include <vector>

#include "gridhaul/analytics.hpp"
#include "gridhaul/grid.hpp"
#include "gridhaul/pf_distribution.hpp"
#include "gridhaul/road_network.hpp"
#include "gridhaul/sim_engine.hpp"
#include "gridhaul/stations.hpp"

namespace gridhaul::io {

// All data files are JSON. Parse errors carry the file path and the
// offending field.
Network load_network(const std::string& path);
Feeder load_feeder(const std::string& path);
RoadGraph load_road_graph(const std::string& path);
std::vector<ChargingStation> load_stations(const std::string& path);

// CSV with columns timestamp,bus_id,p_mw[,q_mvar]; ISO-8601 timestamps.
// Returns hours relative to the Unix epoch.
TimeSeries load_timeseries_csv(const std::string& path, bool with_q,
                               TimeSeries* q_out = nullptr);

double parse_iso8601_hours(const std::string& stamp);

// GeoJSON FeatureCollection: one Point per bus with v_pu and violating
// properties; buses without coordinates are omitted and counted in the
// collection metadata.
std::string export_geojson(const std::vector<double>& v_mag,
                           const Network& net, const ViolationBand& band);

std::string export_step_records_csv(const std::vector<StepRecord>& records);
std::vector<StepRecord> parse_step_records_csv(const std::string& csv);

std::string export_sweep_csv(const std::vector<SweepSample>& samples);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace gridhaul::io
