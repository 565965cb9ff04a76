#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "contra/emergence.hpp"
#include "contra/engine.hpp"
#include "contra/params.hpp"

namespace contra {

struct Raster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

  Raster(int w, int h, std::array<std::uint8_t, 3> fill);
  void fill_rect(int x0, int y0, int x1, int y1, std::array<std::uint8_t, 3> color);
};

// Uniform face of a scenario for the runner: parameters, rules, initial swarm, frame schema,
// environment dumps and rasters.
class Scenario {
 public:
  virtual ~Scenario() = default;

  [[nodiscard]] virtual std::string_view name() const = 0;
  [[nodiscard]] virtual std::uint64_t default_ticks() const = 0;
  [[nodiscard]] ParamSet& params() { return params_; }
  [[nodiscard]] const ParamSet& params() const { return params_; }

  virtual void register_rules(Rulebook& rules) const = 0;
  [[nodiscard]] virtual Swarm make_swarm(std::uint64_t seed) const = 0;
  [[nodiscard]] virtual EmergenceSpec emergence_spec() const = 0;

  // Frame CSV columns after "tick,"; one row per individual.
  [[nodiscard]] virtual std::string frame_columns() const = 0;
  virtual void append_frame_row(std::string& out, const IndividualRecord& record) const = 0;
  [[nodiscard]] virtual Individual parse_frame_row(std::span<const std::string_view> fields) const = 0;

  // Scenarios with a spatial medium dump it as sparse "tick,x,y,value" rows.
  [[nodiscard]] virtual bool has_environment() const { return false; }
  virtual void append_environment(std::string& out, const TickSnapshot& snapshot) const;
  virtual void restore_environment(Swarm& swarm, std::span<const std::array<double, 3>> cells) const;

  [[nodiscard]] virtual std::optional<Raster> render(const TickSnapshot& snapshot) const;

 protected:
  ParamSet params_;
};

[[nodiscard]] std::vector<std::string> scenario_names();
// Throws ConfigurationError for unknown names.
[[nodiscard]] std::unique_ptr<Scenario> make_scenario(std::string_view name);

// Shortest round-trip text for a double.
void append_number(std::string& out, double v);
void append_number(std::string& out, std::uint64_t v);
void append_number(std::string& out, std::int64_t v);
[[nodiscard]] double parse_double(std::string_view text);
[[nodiscard]] std::uint64_t parse_uint(std::string_view text);
[[nodiscard]] std::vector<std::string_view> split_csv(std::string_view line);

}  // namespace contra
