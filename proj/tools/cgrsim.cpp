// cgrsim: experiment runner and contact-plan toolbox.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cgr/contact_plan.hpp"
#include "cgr/scenario.hpp"
#include "cgr/sim.hpp"

namespace fs = std::filesystem;
using namespace cgr;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- flat key = value files ------------------------------------------------

std::vector<std::pair<std::string, std::string>> read_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t n = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++n;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("{}:{}: expected key = value", path.string(), n));
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(fmt::format("{}:{}: empty key", path.string(), n));
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

// Config values become --key=value tokens placed before the real flags, so
// anything given on the command line wins.
std::vector<std::string> merge_config(const std::vector<std::string>& args) {
  if (args.size() < 2) return args;
  std::string config;
  std::vector<std::string> rest;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[++i];
    } else if (args[i].starts_with("--config=")) {
      config = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  std::vector<std::string> out{args[0]};
  if (rest.empty()) return out;
  out.push_back(rest.front());  // subcommand
  if (!config.empty()) {
    for (const auto& [k, v] : read_config(config)) {
      const std::string flag = "--" + k;
      const bool given = std::any_of(rest.begin(), rest.end(), [&](const std::string& a) {
        return a == flag || a.starts_with(flag + "=");
      });
      if (!given) out.push_back(flag + "=" + v);
    }
  }
  out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", tmp.string()));
    out << content;
  }
  fs::rename(tmp, path);
}

// ---- shared option groups --------------------------------------------------

struct ScenarioOpts {
  std::string plan;
  bool generate = false;
  int planes = 4;
  int sats = 16;
  double inclination = 52.0;
  double altitude_km = 780.0;
  double hours = 24.0;
  int step_s = 1;
  RateBps gen_rate = 400;
  double max_range_km = 4500.0;
  std::string plane_hops = "2";
  std::string gs1 = "48.11,-1.68";
  std::string gs2 = "40.71,-74.0";

  void add(CLI::App* app, bool with_plan) {
    if (with_plan) {
      app->add_option("--plan", plan, "Contact plan file");
      app->add_flag("--generate", generate, "Generate the constellation scenario instead of reading --plan");
    }
    app->add_option("--planes", planes, "Orbital planes");
    app->add_option("--sats", sats, "Satellites in total");
    app->add_option("--inclination", inclination, "Inclination in degrees");
    app->add_option("--altitude-km", altitude_km, "Orbit altitude above the 6371 km sphere");
    app->add_option("--hours", hours, "Scenario length in hours");
    app->add_option("--step-s", step_s, "Visibility sampling step in seconds");
    app->add_option("--gen-rate", gen_rate, "Contact rate in bps for generated plans");
    app->add_option("--max-range-km", max_range_km, "Maximum link range in km");
    app->add_option("--plane-hops", plane_hops, "Plane-hop limit, or 'none'");
    app->add_option("--gs1", gs1, "Source ground station 'lat,lon'");
    app->add_option("--gs2", gs2, "Destination ground station 'lat,lon'");
  }

  static std::pair<double, double> lat_lon(const std::string& s, const char* flag) {
    double lat = 0, lon = 0;
    char comma = 0;
    std::istringstream in(s);
    if (!(in >> lat >> comma >> lon) || comma != ',' || !(in >> std::ws).eof())
      throw ConfigError(fmt::format("{} expects 'lat,lon', got '{}'", flag, s));
    return {lat, lon};
  }

  ScenarioSpec spec() const {
    ScenarioSpec s;
    s.constellation.planes = planes;
    s.constellation.sats = sats;
    s.constellation.inclination_deg = inclination;
    s.constellation.radius_m = kEarthRadius + altitude_km * 1e3;
    auto [lat1, lon1] = lat_lon(gs1, "--gs1");
    auto [lat2, lon2] = lat_lon(gs2, "--gs2");
    s.ground_stations = {{"GS1", lat1, lon1, true, true}, {"GS2", lat2, lon2, true, true}};
    s.rule.max_range_m = max_range_km * 1e3;
    if (plane_hops == "none") {
      s.rule.plane_hops.reset();
    } else {
      try {
        s.rule.plane_hops = std::stoi(plane_hops);
      } catch (const std::exception&) {
        throw ConfigError(fmt::format("--plane-hops expects an integer or 'none', got '{}'", plane_hops));
      }
    }
    s.horizon_s = static_cast<int>(std::lround(hours * 3600.0));
    s.step_s = step_s;
    s.rate = gen_rate;
    return s;
  }

  ContactPlan load() const {
    if (generate == !plan.empty())
      throw ConfigError("exactly one scenario source is required: --plan FILE or --generate");
    if (generate) return build_contact_plan(spec());
    return load_contact_plan(plan);
  }

  void manifest(std::string& out, bool with_plan) const {
    if (with_plan) {
      if (!plan.empty()) out += fmt::format("plan = {}\n", plan);
      out += fmt::format("generate = {}\n", generate ? "true" : "false");
    }
    out += fmt::format("planes = {}\nsats = {}\ninclination = {}\naltitude-km = {}\nhours = {}\nstep-s = {}\n", planes,
                       sats, inclination, altitude_km, hours, step_s);
    out += fmt::format("gen-rate = {}\nmax-range-km = {}\nplane-hops = {}\ngs1 = {}\ngs2 = {}\n", gen_rate,
                       max_range_km, plane_hops, gs1, gs2);
  }
};

std::optional<RateBps> parse_rate(const std::string& s) {
  if (s == "plan") return std::nullopt;
  if (s == "inf") return kInfiniteRate;
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used == s.size() && v > 0) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(fmt::format("--rate expects a positive integer, 'inf' or 'plan', got '{}'", s));
}

std::optional<int> parse_buffer(const std::string& s) {
  if (s == "inf") return std::nullopt;
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used == s.size() && v > 0) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(fmt::format("--buffer expects a positive integer or 'inf', got '{}'", s));
}

struct SimOpts {
  Bits bundle_size = 800;
  int k = 10;
  double horizon_s = 0;  // 0: end of plan
  TimeMs time_step_ms = 1000;
  double period_s = 2000;
  double margin = 0.0;
  std::uint64_t seed = 0;
  TimeMs jitter_ms = 0;
  std::string source = "GS1";
  std::string dest = "GS2";

  void add(CLI::App* app) {
    app->add_option("--bundle-size", bundle_size, "Bundle size in bits");
    app->add_option("--k", k, "Routes kept by the benchmark source (Yen)");
    app->add_option("--horizon-s", horizon_s, "Simulation end in seconds, 0 for the end of the plan");
    app->add_option("--time-step-ms", time_step_ms, "Retry period");
    app->add_option("--period-s", period_s, "Workload generation period");
    app->add_option("--margin", margin, "Safety margin fraction withheld from source routing");
    app->add_option("--seed", seed, "Seed for the optional workload jitter");
    app->add_option("--jitter-ms", jitter_ms, "Uniform jitter added to generation times");
    app->add_option("--source", source, "Source node name");
    app->add_option("--dest", dest, "Destination node name");
  }

  SimConfig base() const {
    SimConfig c;
    c.bundle_size = bundle_size;
    c.k = k;
    if (horizon_s > 0) c.horizon = static_cast<TimeMs>(std::llround(horizon_s * 1000.0));
    c.time_step = time_step_ms;
    c.period = static_cast<TimeMs>(std::llround(period_s * 1000.0));
    c.margin_fraction = margin;
    c.seed = seed;
    c.jitter = jitter_ms;
    c.source = source;
    c.destination = dest;
    return c;
  }

  void manifest(std::string& out) const {
    out += fmt::format("bundle-size = {}\nk = {}\nhorizon-s = {}\ntime-step-ms = {}\nperiod-s = {}\n", bundle_size, k,
                       horizon_s, time_step_ms, period_s);
    out += fmt::format("margin = {}\nseed = {}\njitter-ms = {}\nsource = {}\ndest = {}\n", margin, seed, jitter_ms,
                       source, dest);
  }
};

void write_run_outputs(const fs::path& dir, const SimResult& r) {
  fs::create_directories(dir);
  write_atomic(dir / "per_bundle.csv", per_bundle_csv(r.metrics));
  write_atomic(dir / "summary.csv", summary_header() + summary_row(r));
  write_atomic(dir / "cp_size.csv", cp_size_csv(r.cp_size));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  if (out.empty()) throw ConfigError(fmt::format("empty list '{}'", s));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contact graph routing simulator"};
  app.require_subcommand(1);

  ScenarioOpts scen;
  SimOpts sim;
  std::string out_dir = "out";
  std::string config_path;  // consumed by merge_config; registered for --help

  // run
  auto* run = app.add_subcommand("run", "Simulate one configuration");
  std::string algo = "proposed", rate = "plan", buffer = "inf";
  int nb = 200;
  scen.add(run, true);
  sim.add(run);
  run->add_option("--algo", algo, "proposed | benchmark");
  run->add_option("--nb", nb, "Bundles generated over the period");
  run->add_option("--rate", rate, "Contact rate override: bps, 'inf' or 'plan'");
  run->add_option("--buffer", buffer, "Per-node buffer in bundles, or 'inf'");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--config", config_path, "Flat key = value file; flags override it");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Simulate the cartesian product of listed values");
  std::string algos = "proposed,benchmark", nbs = "50,200,400", rates = "plan", buffers = "inf";
  bool serial = false;
  scen.add(sweep, true);
  sim.add(sweep);
  sweep->add_option("--algo", algos, "Comma list of algorithms");
  sweep->add_option("--nb", nbs, "Comma list of N_b values");
  sweep->add_option("--rate", rates, "Comma list of rates");
  sweep->add_option("--buffer", buffers, "Comma list of buffer sizes");
  sweep->add_flag("--serial", serial, "Run points one after the other");
  sweep->add_option("--out", out_dir, "Output directory");
  sweep->add_option("--config", config_path, "Flat key = value file; flags override it");

  // gen-scenario
  auto* gen = app.add_subcommand("gen-scenario", "Write a generated contact plan");
  std::string gen_out;
  scen.add(gen, false);
  gen->add_option("-o,--output", gen_out, "Plan file to write")->required();
  gen->add_option("--config", config_path, "Flat key = value file; flags override it");

  // cp-stats
  auto* stats = app.add_subcommand("cp-stats", "Summarize a contact plan file");
  std::string stats_file;
  bool per_pair = false;
  stats->add_option("plan", stats_file, "Plan file")->required();
  stats->add_flag("--per-pair", per_pair, "Also list contact counts per (sender, receiver)");

  std::vector<std::string> args(argv, argv + argc);
  try {
    args = merge_config(args);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  std::vector<const char*> cargs;
  for (const auto& a : args) cargs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) {
      SimConfig cfg = sim.base();
      cfg.algorithm = parse_algorithm(algo);
      cfg.n_bundles = nb;
      cfg.rate = parse_rate(rate);
      cfg.buffer_bundles = parse_buffer(buffer);
      cfg.validate();
      const ContactPlan plan = scen.load();
      const SimResult r = run_simulation(plan, cfg);
      write_run_outputs(out_dir, r);
      std::string manifest = "# cgrsim run\n";
      scen.manifest(manifest, true);
      sim.manifest(manifest);
      manifest += fmt::format("algo = {}\nnb = {}\nrate = {}\nbuffer = {}\nout = {}\n", algo, nb, rate, buffer, out_dir);
      write_atomic(fs::path(out_dir) / "manifest.cfg", manifest);
      std::cout << summary_header() << summary_row(r);
    } else if (*sweep) {
      std::vector<SimConfig> points;
      for (const auto& a : split_list(algos))
        for (const auto& rt : split_list(rates))
          for (const auto& bf : split_list(buffers))
            for (const auto& n : split_list(nbs)) {
              SimConfig cfg = sim.base();
              cfg.algorithm = parse_algorithm(a);
              cfg.rate = parse_rate(rt);
              cfg.buffer_bundles = parse_buffer(bf);
              try {
                cfg.n_bundles = std::stoi(n);
              } catch (const std::exception&) {
                throw ConfigError(fmt::format("--nb expects integers, got '{}'", n));
              }
              cfg.validate();
              points.push_back(cfg);
            }
      const ContactPlan plan = scen.load();
      const auto results = serial ? run_sweep_serial(plan, points) : run_sweep(plan, points);
      fs::create_directories(out_dir);
      for (std::size_t i = 0; i < results.size(); ++i) {
        const fs::path dir = fs::path(out_dir) / fmt::format("point_{:03}", i);
        fs::create_directories(dir);
        write_atomic(dir / "per_bundle.csv", per_bundle_csv(results[i].metrics));
        write_atomic(dir / "cp_size.csv", cp_size_csv(results[i].cp_size));
      }
      write_atomic(fs::path(out_dir) / "summary.csv", summary_csv(results));
      std::string manifest = "# cgrsim sweep\n";
      scen.manifest(manifest, true);
      sim.manifest(manifest);
      manifest += fmt::format("algo = {}\nnb = {}\nrate = {}\nbuffer = {}\nout = {}\n", algos, nbs, rates, buffers,
                              out_dir);
      write_atomic(fs::path(out_dir) / "manifest.cfg", manifest);
      std::cout << summary_csv(results);
    } else if (*gen) {
      const ContactPlan plan = build_contact_plan(scen.spec());
      write_atomic(gen_out, serialize_contact_plan(plan));
      std::cerr << fmt::format("wrote {} contacts to {}\n", plan.size(), gen_out);
    } else if (*stats) {
      const ContactPlan plan = load_contact_plan(stats_file);
      double total = 0;
      std::map<std::pair<std::string, std::string>, int> pairs;
      for (const auto& [id, c] : plan.contacts()) {
        total += static_cast<double>(c.duration()) / 1000.0;
        ++pairs[{plan.node_info(c.sender).name, plan.node_info(c.receiver).name}];
      }
      std::cout << fmt::format("contacts {}\n", plan.size());
      std::cout << fmt::format("mean_duration_s {:.2f}\n", plan.empty() ? 0.0 : total / static_cast<double>(plan.size()));
      if (per_pair)
        for (const auto& [p, n] : pairs) std::cout << fmt::format("pair {} {} {}\n", p.first, p.second, n);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
