#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "contra/runner.hpp"

namespace {

enum Exit : int { kOk = 0, kNotEmerged = 1, kUsage = 2, kIo = 3 };

std::pair<std::string, std::string> split_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw contra::ConfigurationError("--set expects key=value, got '" + text + "'");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contradiction-driven swarm simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a scenario");
  std::string scenario;
  std::int64_t ticks = -1;
  std::uint64_t seed = 0, stride = 1;
  std::string config_file, out;
  std::vector<std::string> sets;
  bool frames = false, metrics = false, report = false, raster = false, assert_emergence = false, serial = false;
  run->add_option("scenario", scenario, "ants | bees | geese | pool")->required();
  auto* ticks_opt = run->add_option("--ticks", ticks, "Number of ticks (default: scenario default)");
  auto* seed_opt = run->add_option("--seed", seed, "Random seed");
  run->add_option("--config", config_file, "JSON config file")->check(CLI::ExistingFile);
  run->add_option("--set", sets, "Parameter override key=value (repeatable)")->allow_extra_args(false);
  auto* out_opt = run->add_option("--out", out, "Output directory (default: $CONTRA_OUT_DIR or ./contra-out)");
  auto* frames_opt = run->add_flag("--frames", frames, "Write frames.csv");
  auto* metrics_opt = run->add_flag("--metrics", metrics, "Write metrics.ndjson");
  auto* report_opt = run->add_flag("--report", report, "Write report.ndjson");
  auto* raster_opt = run->add_flag("--raster", raster, "Write PPM rasters");
  auto* stride_opt = run->add_option("--stride", stride, "Raster and environment stride")->check(CLI::PositiveNumber);
  auto* assert_opt = run->add_flag("--assert-emergence", assert_emergence, "Exit 1 when emergence is not detected");
  auto* serial_opt = run->add_flag("--serial", serial, "Use the serial reference kernels");

  auto* rep = app.add_subcommand("report", "Re-evaluate emergence over a stored trace");
  std::string trace_dir;
  rep->add_option("trace-dir", trace_dir, "Directory written by run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*rep) {
      const auto outcome = contra::replay(trace_dir, std::cout);
      std::cout << "verdict: " << (outcome.verdict ? "emerged" : "not emerged") << "\n";
      return kOk;
    }

    contra::RunConfig config;
    if (!config_file.empty()) config = contra::load_config_file(config_file);
    config.scenario = scenario;
    if (*ticks_opt) {
      if (ticks < 0) {
        std::cerr << "parse error: ticks must be non-negative, got " << ticks << "\n";
        return kUsage;
      }
      config.ticks = static_cast<std::uint64_t>(ticks);
    }
    if (*seed_opt) config.seed = seed;
    for (const auto& s : sets) config.overrides.push_back(split_override(s));
    if (*out_opt) config.out = out;
    if (*frames_opt) config.frames = true;
    if (*metrics_opt) config.metrics = true;
    if (*report_opt) config.report = true;
    if (*raster_opt) config.raster = true;
    if (*stride_opt) config.stride = stride;
    if (*assert_opt) config.assert_emergence = true;
    if (*serial_opt) config.policy = contra::ExecutionPolicy::Serial;

    const auto outcome = contra::execute(config, std::cout);
    return config.assert_emergence && !outcome.report.verdict ? kNotEmerged : kOk;
  } catch (const contra::ConfigurationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  }
}
