#include "contra/runner.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace contra {

namespace {

using nlohmann::json;

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void write_or_throw(std::ofstream& out, std::string_view data, const std::filesystem::path& path) {
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw std::runtime_error("write failed on " + path.string());
}

json header_json(const Scenario& scenario, std::uint64_t hash, std::uint64_t seed, std::uint64_t ticks) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%016" PRIx64, hash);
  return {{"header",
           {{"tool", "contra"}, {"scenario", scenario.name()}, {"config", buf}, {"seed", seed},
            {"ticks", {0, ticks}}}}};
}

json report_record(const Swarm& swarm, const EmergenceSpec& spec, std::uint64_t tick, EmergenceReport* keep) {
  EmergenceReport report = evaluate(swarm, spec, tick);
  json j = report;
  json metrics = json::object();
  for (const auto& [id, metric] : spec.metrics) {
    const auto v = metric(swarm);
    metrics[id] = v ? json(*v) : json(nullptr);
  }
  j["metrics"] = std::move(metrics);
  if (keep != nullptr) *keep = std::move(report);
  return j;
}

void write_ppm(const std::filesystem::path& path, const Raster& img, const std::string& header) {
  auto out = open_output(path);
  std::string head = "P6 # " + header + "\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  write_or_throw(out, head, path);
  write_or_throw(out, std::string_view(reinterpret_cast<const char*>(img.rgb.data()), img.rgb.size()), path);
}

bool emitted_tick(std::uint64_t tick, std::uint64_t stride, std::uint64_t last) {
  return tick % stride == 0 || tick == last;
}

}  // namespace

RunConfig load_config_file(const std::filesystem::path& file, RunConfig base) {
  std::ifstream in(file);
  if (!in) throw ConfigurationError("cannot read config file " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigurationError("config file " + file.string() + ": " + e.what());
  }
  auto get = [&](const char* key, auto& field) {
    if (!j.contains(key)) return;
    try {
      field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
    } catch (const json::exception&) {
      throw ConfigurationError(std::string("config key '") + key + "' has the wrong type");
    }
  };
  get("scenario", base.scenario);
  if (j.contains("ticks")) {
    std::int64_t t = 0;
    get("ticks", t);
    if (t < 0) throw ConfigurationError("config key 'ticks' must be non-negative");
    base.ticks = static_cast<std::uint64_t>(t);
  }
  get("seed", base.seed);
  std::string out;
  get("out", out);
  if (!out.empty()) base.out = out;
  get("frames", base.frames);
  get("metrics", base.metrics);
  get("report", base.report);
  get("raster", base.raster);
  get("stride", base.stride);
  get("assert_emergence", base.assert_emergence);
  if (j.contains("overrides")) {
    if (!j["overrides"].is_object()) throw ConfigurationError("config key 'overrides' must be an object");
    for (const auto& [key, value] : j["overrides"].items())
      base.overrides.emplace_back(key, value.is_string() ? value.get<std::string>() : value.dump());
  }
  return base;
}

std::filesystem::path resolve_output_dir(const std::filesystem::path& explicit_dir) {
  if (!explicit_dir.empty()) return explicit_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') return env;
  return "contra-out";
}

std::unique_ptr<Scenario> configure_scenario(const RunConfig& config) {
  auto scenario = make_scenario(config.scenario);
  if (scenario->name() == "bees") scenario->params().set("bees.population", "2000");
  for (const auto& [key, value] : config.overrides) scenario->params().set(key, value);
  return scenario;
}

std::uint64_t config_hash(const Scenario& scenario, std::uint64_t ticks) {
  std::string text = "scenario=" + std::string(scenario.name()) + ";ticks=" + std::to_string(ticks) + ";";
  for (const auto& [k, v] : scenario.params().values()) text += k + "=" + v + ";";
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string header_text(const Scenario& scenario, std::uint64_t hash, std::uint64_t seed, std::uint64_t ticks) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "contra scenario=%s config=0x%016" PRIx64 " seed=%" PRIu64 " ticks=0..%" PRIu64,
                std::string(scenario.name()).c_str(), hash, seed, ticks);
  return buf;
}

RunOutcome execute(const RunConfig& config, std::ostream& log) {
  if (config.stride == 0) throw ConfigurationError("stride must be positive");
  const auto scenario = configure_scenario(config);
  const std::uint64_t ticks = config.ticks.value_or(scenario->default_ticks());
  const std::uint64_t hash = config_hash(*scenario, ticks);
  const std::string header = header_text(*scenario, hash, config.seed, ticks);

  Rulebook rules;
  scenario->register_rules(rules);
  Swarm swarm = scenario->make_swarm(config.seed);
  const EmergenceSpec spec = scenario->emergence_spec();

  const bool writes = config.frames || config.metrics || config.report || config.raster;
  std::filesystem::path dir;
  std::ofstream frames, environment, metrics;
  if (writes) {
    dir = resolve_output_dir(config.out);
    std::filesystem::create_directories(dir);
    auto run = open_output(dir / "run.ndjson");
    json params = json::object();
    for (const auto& [k, v] : scenario->params().values()) params[k] = v;
    const json cfg = {{"config", {{"scenario", scenario->name()}, {"ticks", ticks}, {"seed", config.seed},
                                  {"stride", config.stride}, {"params", params}}}};
    write_or_throw(run, header_json(*scenario, hash, config.seed, ticks).dump() + "\n" + cfg.dump() + "\n",
                   dir / "run.ndjson");
  }
  if (config.frames) {
    frames = open_output(dir / "frames.csv");
    write_or_throw(frames, "# " + header + "\ntick," + scenario->frame_columns() + "\n", dir / "frames.csv");
    if (scenario->has_environment()) {
      environment = open_output(dir / "environment.csv");
      write_or_throw(environment, "# " + header + "\ntick,x,y,value\n", dir / "environment.csv");
    }
  }
  if (config.metrics) {
    metrics = open_output(dir / "metrics.ndjson");
    write_or_throw(metrics, header_json(*scenario, hash, config.seed, ticks).dump() + "\n", dir / "metrics.ndjson");
  }
  if (config.raster) {
    std::filesystem::create_directories(dir / "raster");
    if (!scenario->render(make_snapshot(swarm, 0, config.seed)))
      log << "note: scenario " << scenario->name() << " has no spatial view; no rasters written\n";
  }

  std::string buffer;
  Observer writer = [&](const TickSnapshot& snap) {
    if (config.frames) {
      buffer.clear();
      for (const auto& r : snap.individuals) {
        append_number(buffer, snap.tick);
        buffer += ',';
        scenario->append_frame_row(buffer, r);
        buffer += '\n';
      }
      write_or_throw(frames, buffer, dir / "frames.csv");
      if (environment.is_open() && emitted_tick(snap.tick, config.stride, ticks)) {
        buffer.clear();
        scenario->append_environment(buffer, snap);
        write_or_throw(environment, buffer, dir / "environment.csv");
      }
    }
    if (config.metrics)
      write_or_throw(metrics, report_record(swarm, spec, snap.tick, nullptr).dump() + "\n", dir / "metrics.ndjson");
    if (config.raster && emitted_tick(snap.tick, config.stride, ticks)) {
      if (auto img = scenario->render(snap)) {
        char name[32];
        std::snprintf(name, sizeof name, "tick_%06" PRIu64 ".ppm", snap.tick);
        write_ppm(dir / "raster" / name, *img, header);
      }
    }
  };

  const Engine engine(rules, config.seed, config.policy);
  const Observer observers[] = {writer};
  engine.run(swarm, ticks, writes ? std::span<const Observer>(observers) : std::span<const Observer>{}, false);

  RunOutcome outcome;
  outcome.ticks = ticks;
  const json final_record = report_record(swarm, spec, ticks, &outcome.report);
  if (config.report) {
    auto out = open_output(dir / "report.ndjson");
    write_or_throw(out, header_json(*scenario, hash, config.seed, ticks).dump() + "\n" + final_record.dump() + "\n",
                   dir / "report.ndjson");
  }
  log << final_record.dump() << "\n";
  log << "verdict: " << (outcome.report.verdict ? "emerged" : "not emerged") << "\n";
  return outcome;
}

ReplayOutcome replay(const std::filesystem::path& trace_dir, std::ostream& records) {
  std::ifstream run(trace_dir / "run.ndjson");
  if (!run) throw ConfigurationError("no run.ndjson in " + trace_dir.string());
  std::string line;
  json cfg;
  while (std::getline(run, line))
    if (auto j = json::parse(line, nullptr, false); !j.is_discarded() && j.contains("config")) cfg = j["config"];
  if (cfg.is_null()) throw ConfigurationError("run.ndjson has no config record");

  auto scenario = make_scenario(cfg.at("scenario").get<std::string>());
  for (const auto& [k, v] : cfg.at("params").items()) scenario->params().set(k, v.get<std::string>());
  const auto seed = cfg.at("seed").get<std::uint64_t>();
  Swarm swarm = scenario->make_swarm(seed);
  const EmergenceSpec spec = scenario->emergence_spec();

  std::map<std::uint64_t, std::vector<std::array<double, 3>>> cells;
  std::set<std::uint64_t> env_ticks;
  if (scenario->has_environment()) {
    std::ifstream env(trace_dir / "environment.csv");
    if (!env) throw ConfigurationError("trace lacks environment.csv for scenario " + std::string(scenario->name()));
    bool columns = false;
    while (std::getline(env, line)) {
      if (line.empty() || line[0] == '#') continue;
      if (!columns) {
        columns = true;
        continue;
      }
      const auto f = split_csv(line);
      if (f.size() != 4) throw ConfigurationError("malformed environment row: " + line);
      cells[parse_uint(f[0])].push_back({parse_double(f[1]), parse_double(f[2]), parse_double(f[3])});
    }
    // Ticks whose grid was empty leave no rows; the stride recorded in run.ndjson says which were dumped.
    const auto stride = cfg.value("stride", std::uint64_t{1});
    const auto ticks = cfg.at("ticks").get<std::uint64_t>();
    for (std::uint64_t t = 0; t <= ticks; ++t)
      if (emitted_tick(t, stride, ticks)) env_ticks.insert(t);
  }

  std::ifstream frames(trace_dir / "frames.csv");
  if (!frames) throw ConfigurationError("no frames.csv in " + trace_dir.string());
  ReplayOutcome outcome;
  std::vector<Individual> current;
  std::optional<std::uint64_t> tick;
  auto flush = [&] {
    if (!tick || (scenario->has_environment() && !env_ticks.contains(*tick))) return;
    swarm.individuals = current;
    if (scenario->has_environment()) scenario->restore_environment(swarm, cells[*tick]);
    EmergenceReport report;
    records << report_record(swarm, spec, *tick, &report).dump() << "\n";
    outcome.verdict = report.verdict;
    outcome.reports.push_back(std::move(report));
  };
  bool columns = false;
  while (std::getline(frames, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!columns) {
      columns = true;
      continue;
    }
    const auto f = split_csv(line);
    const auto t = parse_uint(f.at(0));
    if (tick && t != *tick) {
      flush();
      current.clear();
    }
    tick = t;
    current.push_back(scenario->parse_frame_row(std::span(f).subspan(1)));
  }
  flush();
  if (outcome.reports.empty()) throw ConfigurationError("trace has no replayable frames");
  return outcome;
}

}  // namespace contra
