#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "contra/emergence.hpp"
#include "contra/engine.hpp"
#include "contra/geometry.hpp"
#include "contra/params.hpp"

namespace contra::pool {

inline constexpr const char* kSafety = "c41";
inline constexpr const char* kUncrowded = "c42";

enum class SwimmerType : std::int64_t { Learner = 0, Veteran = 1 };

struct Params {
  int swimmers = 1000;
  double veteran_fraction = 0.25;
  double side = 50.0;            // m
  double d_safe = 2.0;           // m
  double sense_radius = 5.0;     // m
  double learner_speed = 1.0;    // m/s
  double veteran_speed = 2.0;    // m/s
  double tick = 1.0;             // s
  double cone_half_angle = 45.0; // degrees
  // Std-dev of the per-tick course jitter for a swimmer with nobody ahead (radians).
  double heading_noise = 1.6;
  double steer_angle = 30.0;     // degrees turned away from another-type swimmer ahead
  double loop_threshold = 0.6;
};

void bind(Params& p, ParamSet& set);

class PoolWorld final : public Environment {
 public:
  explicit PoolWorld(double side);
  [[nodiscard]] std::unique_ptr<Environment> clone() const override;
  [[nodiscard]] std::vector<double> digest() const override { return {side_}; }
  [[nodiscard]] double side() const { return side_; }

 private:
  double side_;
};

// Uniform grid over [0, side]^2; queries return slot indices in ascending order.
class SpatialHash {
 public:
  SpatialHash(double side, double cell, std::span<const Vec2> positions);
  [[nodiscard]] std::vector<std::size_t> query(Vec2 center, double radius) const;

 private:
  [[nodiscard]] int cell_of(double v) const;
  double cell_;
  int dim_;
  std::span<const Vec2> positions_;
  std::vector<std::vector<std::size_t>> buckets_;
};

[[nodiscard]] SwimmerType type_of(const Individual& s);
[[nodiscard]] double preferred_speed(SwimmerType t, const Params& p);
[[nodiscard]] Individual make_swimmer(IndividualId id, SwimmerType type, Vec2 position, double heading,
                                      const Params& p);

// Distance to the nearest wall point inside the forward cone, or +inf.
[[nodiscard]] double wall_distance_in_cone(Vec2 pos, double heading, const Params& p);
[[nodiscard]] bool in_cone(Vec2 pos, double heading, Vec2 target, const Params& p);

[[nodiscard]] double update_safety(double obstacle_distance, const Params& p);
[[nodiscard]] double update_crowding(std::size_t neighbors, double speed);

// Behavior id ("a41", "a42" or "a43") chosen by the swimmer's guards.
[[nodiscard]] std::string swimmer_behavior(double safety, double uncrowded, SwimmerType type,
                                           const Params& p);

// Returns `heading` unchanged unless a wall lies within d_safe straight ahead.
[[nodiscard]] double wall_turn(SwimmerType type, Vec2 pos, double heading, Rng& rng, const Params& p);

struct LoopResult {
  bool formed = false;
  double order = 0.0;
  double separation = std::numeric_limits<double>::infinity();
};
[[nodiscard]] LoopResult detect_loop(const Swarm& swarm, const Params& p);

void register_rules(Rulebook& rules, const Params& p);
[[nodiscard]] Swarm make_swarm(const Params& p, std::uint64_t seed);
[[nodiscard]] EmergenceSpec emergence_spec(const Params& p);

}  // namespace contra::pool
