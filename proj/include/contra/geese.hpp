#pragma once

#include <cstdint>
#include <memory>
#include <optional>

#include "contra/emergence.hpp"
#include "contra/engine.hpp"
#include "contra/params.hpp"

namespace contra::geese {

inline constexpr const char* kLeading = "c31";
inline constexpr const char* kSpirit = "c32";
inline constexpr const char* kSpacing = "c33";
inline constexpr const char* kProtection = "c34";

struct Params {
  int herd_size = 18;
  double d_safe = 0.6;         // m
  double d_scale = 1.2;        // m
  double theta_max = 128.0;    // degrees
  double theta_comfort = 60.0; // degrees
  double theta_scale = 68.0;   // degrees
  double cruise_speed = 18.0;  // m/s
  double speed_delta = 2.0;    // m/s at |ζ33| = 1
  double lateral_speed = 1.0;  // m/s at |ζ34| = 1
  double drain_rate = 1e-4;    // per tick
  double recover_rate = 5e-5;  // per tick
  double tick = 0.1;           // s
  double init_box = 10.0;      // m
  double migration_heading = 0.0;  // radians
  double formation_epsilon = 0.1;
  // Read the lateral guards on c32 instead of c34 (literal table reading).
  bool lateral_guard_on_spirit = false;
};

void bind(Params& p, ParamSet& set);

[[nodiscard]] std::shared_ptr<const Repertoire> repertoire(const Params& p);
[[nodiscard]] Individual make_goose(IndividualId id, Vec2 position, double heading, bool leader,
                                    const Params& p);

[[nodiscard]] bool is_leader(const Individual& g);
[[nodiscard]] const Individual* leader_of(const Swarm& herd);
// Nearest other goose strictly inside the front half-plane of g's heading.
[[nodiscard]] const Individual* preceding_of(const Swarm& herd, const Individual& g);

[[nodiscard]] double update_following(double distance, const Params& p);
[[nodiscard]] double update_protection(double theta_deg, const Params& p);
[[nodiscard]] double update_spirit(double spirit, bool leading, const Params& p);
// |angle| in degrees between g's heading and the bearing to `target`.
[[nodiscard]] double vision_angle(const Body& g, Vec2 target);

struct GooseBehavior {
  std::optional<std::string> longitudinal;  // a31, a32 or a33
  std::optional<std::string> lateral;       // a34 or a35
};
[[nodiscard]] GooseBehavior goose_behavior(double leading, double spirit, double spacing,
                                           double protection, const Params& p);

// Promotes the frontmost follower (largest projection on the mean heading; lower id on ties).
void leader_handoff(Swarm& herd);

struct FormationMetrics {
  std::size_t leaders = 0;
  double mean_abs_spacing = 0.0;
  double mean_abs_protection = 0.0;
};
struct FormationResult {
  bool formed = false;
  FormationMetrics metrics;
};
[[nodiscard]] FormationResult detect_formation(const Swarm& herd, double epsilon);

void register_rules(Rulebook& rules, const Params& p);
[[nodiscard]] Swarm make_swarm(const Params& p, std::uint64_t seed);
[[nodiscard]] EmergenceSpec emergence_spec(const Params& p);

}  // namespace contra::geese
