#include "gridhaul/io.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace gridhaul::io {

using nlohmann::json;

namespace {

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(path + ": " + e.what());
  }
}

// Field access with path-qualified diagnostics.
template <typename T>
T get(const json& j, const std::string& key, const std::string& ctx) {
  if (!j.contains(key)) throw Error(ctx + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ctx + ": field '" + key + "': " + e.what());
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback,
         const std::string& ctx) {
  if (!j.contains(key)) return fallback;
  return get<T>(j, key, ctx);
}

std::optional<GeoPoint> read_coord(const json& j, const std::string& ctx) {
  if (j.contains("lat") && j.contains("lon"))
    return GeoPoint{get<double>(j, "lat", ctx), get<double>(j, "lon", ctx)};
  return std::nullopt;
}

std::string fmt(double v) {
  // Shortest round-trippable representation; keeps CSV output byte-stable.
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  double parsed;
  std::sscanf(buf, "%lf", &parsed);
  for (int prec = 1; prec < 17; ++prec) {
    char shorter[32];
    std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
    std::sscanf(shorter, "%lf", &parsed);
    if (parsed == v) return shorter;
  }
  return buf;
}

}  // namespace

Network load_network(const std::string& path) {
  const json j = load_json(path);
  Network net;
  net.base_mva = get<double>(j, "base_mva", path);

  for (const auto& bj : get<json>(j, "buses", path)) {
    const std::string ctx = path + ": bus";
    Bus b;
    b.id = get<int>(bj, "id", ctx);
    const std::string kind = get<std::string>(bj, "kind", ctx);
    if (kind == "slack") b.kind = BusKind::Slack;
    else if (kind == "pv") b.kind = BusKind::PV;
    else if (kind == "pq") b.kind = BusKind::PQ;
    else throw Error(ctx + " " + std::to_string(b.id) +
                     ": kind must be slack/pv/pq, got '" + kind + "'");
    b.base_kv = get<double>(bj, "base_kv", ctx);
    b.v_set = get_or(bj, "v_set", 1.0, ctx);
    b.load_p = get_or(bj, "load_p", 0.0, ctx);
    b.load_q = get_or(bj, "load_q", 0.0, ctx);
    b.shunt_g = get_or(bj, "shunt_g", 0.0, ctx);
    b.shunt_b = get_or(bj, "shunt_b", 0.0, ctx);
    b.coord = read_coord(bj, ctx);
    net.buses.push_back(b);
  }
  for (const auto& rj : get_or(j, "branches", json::array(), path)) {
    const std::string ctx = path + ": branch";
    Branch br;
    br.from_bus = get<int>(rj, "from_bus", ctx);
    br.to_bus = get<int>(rj, "to_bus", ctx);
    br.r = get<double>(rj, "r", ctx);
    br.x = get<double>(rj, "x", ctx);
    br.b_charging = get_or(rj, "b_charging", 0.0, ctx);
    br.tap = get_or(rj, "tap", 1.0, ctx);
    br.shift = get_or(rj, "shift", 0.0, ctx);
    br.in_service = get_or(rj, "in_service", true, ctx);
    net.branches.push_back(br);
  }
  for (const auto& gj : get_or(j, "generators", json::array(), path)) {
    const std::string ctx = path + ": generator";
    Generator g;
    g.bus = get<int>(gj, "bus", ctx);
    g.p_set = get_or(gj, "p_set", 0.0, ctx);
    g.q_min = get_or(gj, "q_min", -1e9, ctx);
    g.q_max = get_or(gj, "q_max", 1e9, ctx);
    g.v_set = get_or(gj, "v_set", 1.0, ctx);
    net.generators.push_back(g);
  }
  return net;
}

Feeder load_feeder(const std::string& path) {
  const json j = load_json(path);
  Feeder f;
  f.source_v = get<double>(j, "source_v", path);
  f.base_kv = get<double>(j, "base_kv", path);
  f.base_mva = get<double>(j, "base_mva", path);
  f.source_node = get_or(j, "source_node", 0, path);
  const std::string unit = get_or<std::string>(j, "impedance_unit", "pu", path);
  if (unit == "pu") f.impedance_unit = ImpedanceUnit::PerUnit;
  else if (unit == "ohm") f.impedance_unit = ImpedanceUnit::Ohm;
  else throw Error(path + ": impedance_unit must be 'pu' or 'ohm'");

  for (const auto& nj : get<json>(j, "nodes", path)) {
    const std::string ctx = path + ": node";
    FeederNode n;
    n.id = get<int>(nj, "id", ctx);
    n.load_p = get_or(nj, "load_p", 0.0, ctx);
    n.load_q = get_or(nj, "load_q", 0.0, ctx);
    f.nodes.push_back(n);
  }
  for (const auto& lj : get<json>(j, "lines", path)) {
    const std::string ctx = path + ": line";
    FeederLine l;
    l.from = get<int>(lj, "from", ctx);
    l.to = get<int>(lj, "to", ctx);
    l.r = get<double>(lj, "r", ctx);
    l.x = get<double>(lj, "x", ctx);
    f.lines.push_back(l);
  }
  f.candidate_station_nodes =
      get_or(j, "candidate_station_nodes", std::vector<int>{}, path);
  return f;
}

RoadGraph load_road_graph(const std::string& path) {
  const json j = load_json(path);
  RoadGraph g;
  for (const auto& nj : get<json>(j, "nodes", path)) {
    const std::string ctx = path + ": node";
    RoadNode n;
    n.id = get<int>(nj, "id", ctx);
    n.bus_id = get<int>(nj, "bus_id", ctx);
    n.coord = read_coord(nj, ctx);
    g.nodes.push_back(n);
  }
  for (const auto& ej : get<json>(j, "edges", path)) {
    const std::string ctx = path + ": edge";
    RoadEdge e;
    e.a = get<int>(ej, "a", ctx);
    e.b = get<int>(ej, "b", ctx);
    e.miles = get<double>(ej, "miles", ctx);
    g.edges.push_back(e);
  }
  g.check();
  return g;
}

std::vector<ChargingStation> load_stations(const std::string& path) {
  const json j = load_json(path);
  const json arr = j.is_array() ? j : get<json>(j, "stations", path);
  std::vector<ChargingStation> out;
  for (const auto& sj : arr) {
    const std::string ctx = path + ": station";
    ChargingStation st;
    st.id = get<int>(sj, "id", ctx);
    st.bus_id = get<int>(sj, "bus_id", ctx);
    st.n_ports = get<int>(sj, "n_ports", ctx);
    if (st.n_ports < 1)
      throw Error(ctx + " " + std::to_string(st.id) + ": n_ports must be >= 1");
    st.coord = read_coord(sj, ctx);
    out.push_back(std::move(st));
  }
  return out;
}

double parse_iso8601_hours(const std::string& stamp) {
  int y, mo, d, h = 0, mi = 0, s = 0;
  const int n = std::sscanf(stamp.c_str(), "%d-%d-%dT%d:%d:%d", &y, &mo, &d,
                            &h, &mi, &s);
  if (n < 3) throw Error("bad ISO-8601 timestamp '" + stamp + "'");
  using namespace std::chrono;
  const auto ymd = year{y} / mo / d;
  if (!ymd.ok()) throw Error("bad calendar date in '" + stamp + "'");
  const auto days = sys_days{ymd}.time_since_epoch();
  return duration<double, std::ratio<3600>>(days).count() + h + mi / 60.0 +
         s / 3600.0;
}

TimeSeries load_timeseries_csv(const std::string& path, bool with_q,
                               TimeSeries* q_out) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);

  TimeSeries p;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("timestamp", 0) == 0) continue;

    std::istringstream row(line);
    std::string stamp, bus_s, p_s, q_s;
    if (!std::getline(row, stamp, ',') || !std::getline(row, bus_s, ',') ||
        !std::getline(row, p_s, ','))
      throw Error(path + ":" + std::to_string(lineno) + ": expected " +
                  (with_q ? "4" : "3") + " columns");
    if (with_q && !std::getline(row, q_s, ','))
      throw Error(path + ":" + std::to_string(lineno) + ": missing q_mvar");

    const double t = parse_iso8601_hours(stamp);
    int bus;
    auto [bp, bec] = std::from_chars(bus_s.data(), bus_s.data() + bus_s.size(), bus);
    if (bec != std::errc{})
      throw Error(path + ":" + std::to_string(lineno) + ": bad bus_id '" +
                  bus_s + "'");
    try {
      p.add(bus, t, std::stod(p_s));
      if (with_q && q_out) q_out->add(bus, t, std::stod(q_s));
    } catch (const std::invalid_argument&) {
      throw Error(path + ":" + std::to_string(lineno) + ": bad numeric value");
    }
  }
  return p;
}

std::string export_geojson(const std::vector<double>& v_mag,
                           const Network& net, const ViolationBand& band) {
  if (v_mag.size() != net.n_bus())
    throw Error("voltage vector does not match bus count");

  json features = json::array();
  int omitted = 0;
  for (std::size_t i = 0; i < net.n_bus(); ++i) {
    const auto& b = net.buses[i];
    if (!b.coord) {
      ++omitted;
      continue;
    }
    const bool violating = v_mag[i] < band.lower || v_mag[i] > band.upper;
    features.push_back({
        {"type", "Feature"},
        {"geometry",
         {{"type", "Point"},
          {"coordinates", {b.coord->lon, b.coord->lat}}}},
        {"properties",
         {{"bus_id", b.id}, {"v_pu", v_mag[i]}, {"violating", violating}}},
    });
  }

  json out = {
      {"type", "FeatureCollection"},
      {"metadata", {{"buses_without_coordinates", omitted}}},
      {"features", features},
  };
  return out.dump(2);
}

std::string export_step_records_csv(const std::vector<StepRecord>& records) {
  std::ostringstream os;
  os << "timestamp,n_charging,n_idle,n_moving,n_departed,converged,"
        "n_violations\n";
  for (const auto& r : records) {
    os << fmt(r.timestamp_hours) << ',' << r.n_charging << ',' << r.n_idle
       << ',' << r.n_moving << ',' << r.n_departed << ','
       << (r.converged ? 1 : 0) << ',' << r.n_violations << '\n';
  }
  return os.str();
}

std::vector<StepRecord> parse_step_records_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) ||
      line.rfind("timestamp,n_charging", 0) != 0)
    throw Error("step-record CSV missing header");

  std::vector<StepRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string f[7];
    for (int i = 0; i < 7; ++i) {
      if (!std::getline(row, f[i], ','))
        throw Error("step-record CSV line " + std::to_string(lineno) +
                    ": expected 7 columns");
    }
    StepRecord r;
    r.timestamp_hours = std::stod(f[0]);
    r.n_charging = std::stoi(f[1]);
    r.n_idle = std::stoi(f[2]);
    r.n_moving = std::stoi(f[3]);
    r.n_departed = std::stoi(f[4]);
    r.converged = std::stoi(f[5]) != 0;
    r.n_violations = std::stoi(f[6]);
    out.push_back(std::move(r));
  }
  return out;
}

std::string export_sweep_csv(const std::vector<SweepSample>& samples) {
  std::ostringstream os;
  os << "feeder_id,n_stations,n_vehicles,placement_seed,n_violations,"
        "converged\n";
  for (const auto& s : samples) {
    os << s.feeder_id << ',' << s.n_stations << ',' << s.n_vehicles << ','
       << s.placement_seed << ',' << s.n_violations << ','
       << (s.converged ? 1 : 0) << '\n';
  }
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << content;
  if (!out) throw Error("write failed for " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace gridhaul::io
