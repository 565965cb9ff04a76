#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "contra/engine.hpp"
#include "contra/scenario.hpp"

namespace contra {

// Output directory used when neither --out nor the config file names one.
inline constexpr const char* kOutputDirEnv = "CONTRA_OUT_DIR";

struct RunConfig {
  std::string scenario;
  std::optional<std::uint64_t> ticks;  // scenario default when unset
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> overrides;  // applied in order
  std::filesystem::path out;
  bool frames = false;
  bool metrics = false;
  bool report = false;
  bool raster = false;
  std::uint64_t stride = 1;
  bool assert_emergence = false;
  ExecutionPolicy policy = ExecutionPolicy::Parallel;
};

// Reads {"scenario", "ticks", "seed", "overrides": {key: value}, "out", "frames", "metrics",
// "report", "raster", "stride", "assert_emergence"}; missing keys keep the values in `base`.
[[nodiscard]] RunConfig load_config_file(const std::filesystem::path& file, RunConfig base = {});

// Output directory: explicit value, else $CONTRA_OUT_DIR, else ./contra-out.
[[nodiscard]] std::filesystem::path resolve_output_dir(const std::filesystem::path& explicit_dir);

// Scenario with run-level defaults (full-size colonies) and the overrides applied.
[[nodiscard]] std::unique_ptr<Scenario> configure_scenario(const RunConfig& config);

// FNV-1a over the scenario name, tick count and every resolved parameter value.
[[nodiscard]] std::uint64_t config_hash(const Scenario& scenario, std::uint64_t ticks);
[[nodiscard]] std::string header_text(const Scenario& scenario, std::uint64_t hash, std::uint64_t seed,
                                      std::uint64_t ticks);

struct RunOutcome {
  EmergenceReport report;
  std::uint64_t ticks = 0;
};

// Builds the scenario, runs it and writes the requested outputs. Throws on I/O failure.
RunOutcome execute(const RunConfig& config, std::ostream& log);

struct ReplayOutcome {
  std::vector<EmergenceReport> reports;  // one per replayable stored tick
  bool verdict = false;                  // verdict at the last replayed tick
};

// Re-evaluates emergence over the frames stored in a trace directory written by execute().
ReplayOutcome replay(const std::filesystem::path& trace_dir, std::ostream& records);

}  // namespace contra
