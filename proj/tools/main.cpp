#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gridhaul/io.hpp"
#include "gridhaul/sim_engine.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gridhaul;

namespace {

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(std::string("config ") + path + ": " + e.what());
  }
}

std::string resolve(const json& cfg, const std::string& key,
                    const std::string& cfg_path) {
  if (!cfg.contains(key))
    throw Error("config " + cfg_path + ": missing '" + key + "'");
  // Paths are relative to the config file's directory.
  const fs::path p = cfg.at(key).get<std::string>();
  if (p.is_absolute()) return p.string();
  return (fs::path(cfg_path).parent_path() / p).string();
}

ViolationBand band_from(const json& cfg) {
  ViolationBand band;
  if (cfg.contains("band")) {
    const auto& b = cfg.at("band");
    band.lower = b.at(0).get<double>();
    band.upper = b.at(1).get<double>();
  }
  return band;
}

HdevParams hdev_params_from(const json& cfg) {
  HdevParams p;
  if (!cfg.contains("hdev_params")) return p;
  const auto& h = cfg.at("hdev_params");
  if (h.contains("capacity_kwh")) p.capacity_kwh = h.at("capacity_kwh");
  if (h.contains("consumption_kwh_per_mile"))
    p.consumption_kwh_per_mile = h.at("consumption_kwh_per_mile");
  if (h.contains("speed_mph")) p.speed_mph = h.at("speed_mph");
  if (h.contains("charge_kw")) p.charge_kw = h.at("charge_kw");
  if (h.contains("reserve_fraction")) p.reserve_fraction = h.at("reserve_fraction");
  for (const auto& w : check_params(p)) std::cerr << "warning: " << w << "\n";
  return p;
}

void print_voltages(const std::vector<int>& ids,
                    const std::vector<double>& v_mag,
                    const std::vector<double>* v_ang) {
  std::printf("%8s %12s %12s\n", "bus", "v_pu", v_ang ? "angle_deg" : "");
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (v_ang)
      std::printf("%8d %12.6f %12.6f\n", ids[i], v_mag[i],
                  (*v_ang)[i] * 180.0 / 3.14159265358979323846);
    else
      std::printf("%8d %12.6f\n", ids[i], v_mag[i]);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gridhaul: HDEV fleet / power-grid co-simulation"};
  app.require_subcommand(1);
  app.fallthrough();  // --config/--out/--seed are accepted after subcommands

  std::string config_path, out_dir = ".";
  std::optional<std::uint64_t> seed_flag;
  app.add_option("--config", config_path, "JSON config file")
      ->configurable(false);
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", seed_flag, "RNG seed (overrides config)");

  // validate
  auto* validate_cmd =
      app.add_subcommand("validate", "Validate a network/feeder/road file");
  std::string validate_path;
  validate_cmd->add_option("file", validate_path, "File to validate")
      ->required();

  // solve-pf
  auto* pf_cmd = app.add_subcommand(
      "solve-pf", "One transmission power-flow solve, prints voltages");
  std::string pf_network;
  PfOptions pf_opts;
  double pf_sentinel = 0.01;
  pf_cmd->add_option("network", pf_network, "Network JSON file")->required();
  pf_cmd->add_option("--tol", pf_opts.tol, "Mismatch tolerance (pu)");
  pf_cmd->add_option("--max-iter", pf_opts.max_iter, "Iteration cap");
  pf_cmd->add_flag("--q-limits", pf_opts.enforce_q_limits,
                   "Enforce generator Q limits");
  pf_cmd->add_option("--sentinel", pf_sentinel, "Collapse sentinel (pu)");

  // solve-feeder
  auto* feeder_cmd =
      app.add_subcommand("solve-feeder", "One radial feeder solve");
  std::string feeder_path;
  std::vector<std::string> feeder_stations;
  double feeder_kw = 150.0;
  feeder_cmd->add_option("feeder", feeder_path, "Feeder JSON file")->required();
  feeder_cmd->add_option("--station", feeder_stations,
                         "node=vehicles placement entries");
  feeder_cmd->add_option("--per-vehicle-kw", feeder_kw,
                         "Charging power per vehicle");

  // simulate-transmission
  auto* sim_cmd = app.add_subcommand(
      "simulate-transmission",
      "Full fleet/grid scenario; writes step-records CSV + GeoJSON snapshots");
  int geojson_every = 1;
  sim_cmd->add_option("--geojson-every", geojson_every,
                      "Write a GeoJSON snapshot every N steps (0 = none)");

  // sweep-distribution
  auto* sweep_cmd = app.add_subcommand(
      "sweep-distribution", "Monte Carlo feeder snapshot sweep; writes CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate_cmd) {
      const json j = load_config(validate_path);
      if (j.contains("buses")) {
        const auto report = validate(io::load_network(validate_path));
        if (report.empty()) {
          std::cout << "valid\n";
          return 0;
        }
        for (const auto& v : report) std::cout << v.what << "\n";
        return 1;
      }
      if (j.contains("lines")) {
        const auto feeder = io::load_feeder(validate_path);
        order_radial(feeder);  // throws on cycles / disconnection
        std::cout << "valid\n";
        return 0;
      }
      if (j.contains("edges")) {
        io::load_road_graph(validate_path);
        std::cout << "valid\n";
        return 0;
      }
      if (j.is_array() || j.contains("stations")) {
        io::load_stations(validate_path);
        std::cout << "valid\n";
        return 0;
      }
      std::cerr << validate_path << ": unrecognized file type\n";
      return 1;
    }

    if (*pf_cmd) {
      const Network net = io::load_network(pf_network);
      const auto sol = solve_nr(net, {}, pf_opts);
      const auto v = export_voltages(sol, pf_sentinel);
      std::vector<int> ids;
      for (const auto& b : net.buses) ids.push_back(b.id);
      if (sol.converged) {
        std::printf("converged in %d iterations, mismatch %.3e pu\n",
                    sol.iterations, sol.mismatch_norm);
        print_voltages(ids, v, &sol.v_ang);
      } else {
        std::printf("collapsed (no convergence in %d iterations); "
                    "exporting sentinel %.2f pu\n",
                    sol.iterations, pf_sentinel);
        print_voltages(ids, v, nullptr);
      }
      return 0;
    }

    if (*feeder_cmd) {
      const Feeder feeder = io::load_feeder(feeder_path);
      StationPlacement placement;
      placement.per_vehicle_kw = feeder_kw;
      for (const auto& spec : feeder_stations) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos)
          throw Error("--station expects node=vehicles, got '" + spec + "'");
        placement.station_nodes.push_back(std::stoi(spec.substr(0, eq)));
        placement.vehicles_per_station.push_back(
            std::stoi(spec.substr(eq + 1)));
      }
      const auto sol = solve_fbs(feeder, placement);
      std::printf("%s after %d iterations\n",
                  sol.converged ? "converged" : "NOT converged",
                  sol.iterations);
      std::vector<int> ids;
      for (const auto& n : feeder.nodes) ids.push_back(n.id);
      print_voltages(ids, sol.v_mag, nullptr);
      return sol.converged ? 0 : 1;
    }

    if (*sim_cmd) {
      if (config_path.empty()) throw Error("simulate-transmission needs --config");
      const json cfg = load_config(config_path);

      const Network net = io::load_network(resolve(cfg, "network", config_path));
      const RoadGraph road =
          io::load_road_graph(resolve(cfg, "road", config_path));

      TransmissionScenario sc;
      sc.network = &net;
      sc.road = &road;
      if (cfg.contains("stations"))
        sc.stations = io::load_stations(resolve(cfg, "stations", config_path));
      if (cfg.contains("load_series")) {
        TimeSeries q;
        sc.load_p = io::load_timeseries_csv(
            resolve(cfg, "load_series", config_path), true, &q);
        sc.load_q = std::move(q);
      }
      if (cfg.contains("wind_series"))
        sc.wind_p = io::load_timeseries_csv(
            resolve(cfg, "wind_series", config_path), false);
      if (cfg.contains("solar_series"))
        sc.solar_p = io::load_timeseries_csv(
            resolve(cfg, "solar_series", config_path), false);

      sc.initial_hdevs = cfg.value("initial_hdevs", 0);
      sc.arrivals.rate_per_hour = cfg.value("arrival_rate_per_hour", 0.0);
      for (const auto& n : road.nodes) {
        sc.arrivals.entry_weights.emplace_back(n.id, 1.0);
        sc.arrivals.destination_weights.emplace_back(n.id, 1.0);
      }
      if (cfg.contains("entry_weights")) {
        sc.arrivals.entry_weights.clear();
        for (const auto& [k, v] : cfg.at("entry_weights").items())
          sc.arrivals.entry_weights.emplace_back(std::stoi(k), v.get<double>());
      }
      if (cfg.contains("destination_weights")) {
        sc.arrivals.destination_weights.clear();
        for (const auto& [k, v] : cfg.at("destination_weights").items())
          sc.arrivals.destination_weights.emplace_back(std::stoi(k),
                                                       v.get<double>());
      }
      sc.hdev_params = hdev_params_from(cfg);
      if (cfg.contains("start"))
        sc.start_hours =
            io::parse_iso8601_hours(cfg.at("start").get<std::string>());
      sc.duration_hours = cfg.value("duration_hours", 24.0);
      sc.dt_hours = cfg.value("dt_hours", 0.25);
      sc.seed = seed_flag.value_or(cfg.value("rng_seed", 0));
      sc.band = band_from(cfg);
      sc.collapse_sentinel = cfg.value("collapse_sentinel", 0.01);
      if (cfg.contains("port_strategy"))
        sc.port_strategy =
            parse_port_strategy(cfg.at("port_strategy").get<std::string>());
      if (cfg.contains("default_station_ports"))
        sc.default_station_ports = cfg.at("default_station_ports");
      if (cfg.contains("pf_tol")) sc.pf_opts.tol = cfg.at("pf_tol");

      const auto records = run_transmission_scenario(sc);

      fs::create_directories(out_dir);
      io::write_file((fs::path(out_dir) / "step_records.csv").string(),
                     io::export_step_records_csv(records));
      if (geojson_every > 0) {
        fs::create_directories(fs::path(out_dir) / "geojson");
        for (std::size_t i = 0; i < records.size(); i += geojson_every) {
          char name[32];
          std::snprintf(name, sizeof name, "step_%05zu.geojson", i);
          io::write_file((fs::path(out_dir) / "geojson" / name).string(),
                         io::export_geojson(records[i].v_mag, net, sc.band));
        }
      }
      std::cout << "wrote " << records.size() << " step records to " << out_dir
                << "\n";
      return 0;
    }

    if (*sweep_cmd) {
      if (config_path.empty()) throw Error("sweep-distribution needs --config");
      const json cfg = load_config(config_path);

      std::vector<Feeder> feeders;
      std::vector<std::pair<std::string, const Feeder*>> refs;
      for (const auto& f : cfg.at("feeders"))
        feeders.push_back(io::load_feeder(
            (fs::path(config_path).parent_path() / f.get<std::string>())
                .string()));
      for (std::size_t i = 0; i < feeders.size(); ++i)
        refs.emplace_back(cfg.at("feeders").at(i).get<std::string>(),
                          &feeders[i]);

      SweepConfig sw;
      if (cfg.contains("station_counts"))
        sw.station_counts = cfg.at("station_counts").get<std::vector<int>>();
      sw.vehicle_grid = cfg.at("vehicle_grid").get<std::vector<int>>();
      sw.samples_per_cell = cfg.value("samples_per_cell", 1);
      sw.master_seed = seed_flag.value_or(cfg.value("master_seed", 0));
      sw.per_vehicle_kw = cfg.value("per_vehicle_kw", 150.0);
      sw.band = band_from(cfg);

      const auto result = run_distribution_sweep(refs, sw);
      for (const auto& a : result.audit) std::cerr << "audit: " << a << "\n";

      fs::create_directories(out_dir);
      io::write_file((fs::path(out_dir) / "sweep_samples.csv").string(),
                     io::export_sweep_csv(result.samples));
      std::cout << "wrote " << result.samples.size() << " samples to "
                << out_dir << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  return 0;
}
