#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "contra/emergence.hpp"
#include "contra/engine.hpp"
#include "contra/params.hpp"

namespace contra::ants {

inline constexpr const char* kIdleness = "c11";
inline constexpr const char* kSpecialness = "c12";

inline constexpr double kAtNest = -1.0;
inline constexpr double kAtFood = -2.0 / 3.0;
inline constexpr double kOnPheromone = -1.0 / 3.0;
inline constexpr double kOrdinary = 1.0;

struct Params {
  int width = 100;
  int height = 60;
  // Inclusive cell rectangles.
  int nest_x0 = 5, nest_y0 = 25, nest_x1 = 14, nest_y1 = 34;
  int food_x0 = 85, food_y0 = 25, food_x1 = 94, food_y1 = 34;
  int ants = 200;
  double deposit_amount = 1.0;
  double evaporation_factor = 0.99;
  double presence_threshold = 0.05;
};

void bind(Params& p, ParamSet& set);

struct Cell {
  int x = 0;
  int y = 0;
  friend constexpr bool operator==(Cell, Cell) = default;
};

class BoundsError : public std::out_of_range {
  using std::out_of_range::out_of_range;
};

class AntWorld final : public Environment {
 public:
  explicit AntWorld(const Params& p);

  [[nodiscard]] std::unique_ptr<Environment> clone() const override;
  void apply_edit(const EnvironmentEdit& edit) override;
  [[nodiscard]] std::vector<double> digest() const override { return grid_; }

  [[nodiscard]] int width() const { return width_; }
  [[nodiscard]] int height() const { return height_; }
  [[nodiscard]] bool contains(Cell c) const;
  [[nodiscard]] std::size_t index(Cell c) const;  // throws BoundsError
  [[nodiscard]] bool in_nest(Cell c) const;
  [[nodiscard]] bool in_food(Cell c) const;
  [[nodiscard]] bool marked(Cell c) const;  // pheromone above presence threshold
  [[nodiscard]] double pheromone(Cell c) const;
  void set_pheromone(Cell c, double value);
  [[nodiscard]] double total_pheromone() const;
  [[nodiscard]] const std::vector<double>& grid() const { return grid_; }
  [[nodiscard]] const Params& params() const { return params_; }

 private:
  Params params_;
  int width_;
  int height_;
  std::vector<double> grid_;
};

enum class Behavior { RandomMove, FollowTrail, Homeward, Load, Unload, None };

[[nodiscard]] const char* appearance_id(Behavior b);

// Behavior ids as registered in the repertoire.
[[nodiscard]] std::shared_ptr<const Repertoire> repertoire();

[[nodiscard]] Individual make_ant(IndividualId id, Cell cell);

// Body accessors: position holds the cell, slots[0..1] the dead-reckoned home vector.
[[nodiscard]] Cell cell_of(const Body& body);
[[nodiscard]] Vec2 home_vector(const Body& body);
void set_cell(Body& body, Cell cell);
void set_home_vector(Body& body, Vec2 h);

[[nodiscard]] double sense_place(Cell cell, const AntWorld& world);
[[nodiscard]] Behavior ant_behavior(double idleness, double specialness);

// Executes one behavior for `ant` against the previous-tick grid; pheromone deposits go to `edits`.
void apply_ant_behavior(Individual& ant, Behavior behavior, const AntWorld& world, Rng& rng,
                        std::vector<EnvironmentEdit>& edits);

void evaporate(AntWorld& world);

struct TrailResult {
  bool connected = false;
  std::optional<int> length;  // hop count from a nest cell to the nearest reachable food cell
};

[[nodiscard]] TrailResult detect_trail(const AntWorld& world);

void register_rules(Rulebook& rules);
[[nodiscard]] Swarm make_swarm(const Params& p, std::uint64_t seed);
[[nodiscard]] EmergenceSpec emergence_spec();

// Fraction of ants whose current cell reads as pheromone-marked (ζ12 = -1/3).
[[nodiscard]] double fraction_on_trail(const Swarm& swarm);

}  // namespace contra::ants
