#include "contra/pool.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace contra::pool {

namespace {

constexpr std::size_t kCourse = 0;

// Inward normals of the four walls: west, east, south, north.
constexpr std::array<Vec2, 4> kInward = {Vec2{1, 0}, Vec2{-1, 0}, Vec2{0, 1}, Vec2{0, -1}};

double gap_to(std::size_t wall, Vec2 pos, double side) {
  switch (wall) {
    case 0: return pos.x;
    case 1: return side - pos.x;
    case 2: return pos.y;
    default: return side - pos.y;
  }
}

// Distance along the ray from pos to the first wall it meets.
double ray_to_wall(Vec2 pos, double heading, double side) {
  const Vec2 d = unit(heading);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t w = 0; w < 4; ++w) {
    const double approach = -dot(d, kInward[w]);
    if (approach > 1e-12) best = std::min(best, gap_to(w, pos, side) / approach);
  }
  return best;
}

double query_radius(const Params& p) {
  return std::max({p.sense_radius, 2.0 * p.d_safe, p.learner_speed * p.tick, p.veteran_speed * p.tick});
}

const Relevance* find_relevance(std::span<const Relevance* const> rs, const char* factor) {
  for (const Relevance* r : rs)
    if (std::find(r->factor_ids.begin(), r->factor_ids.end(), factor) != r->factor_ids.end()) return r;
  return nullptr;
}

}  // namespace

void bind(Params& p, ParamSet& set) {
  set.bind("pool.swimmers", p.swimmers);
  set.bind("pool.veteran_fraction", p.veteran_fraction);
  set.bind("pool.side", p.side);
  set.bind("pool.d_safe", p.d_safe);
  set.bind("pool.sense_radius", p.sense_radius);
  set.bind("pool.learner_speed", p.learner_speed);
  set.bind("pool.veteran_speed", p.veteran_speed);
  set.bind("pool.tick", p.tick);
  set.bind("pool.cone_half_angle", p.cone_half_angle);
  set.bind("pool.heading_noise", p.heading_noise);
  set.bind("pool.steer_angle", p.steer_angle);
  set.bind("pool.loop_threshold", p.loop_threshold);
}

PoolWorld::PoolWorld(double side) : side_(side) {
  if (!(side > 0.0)) throw ConfigurationError("pool side must be positive");
}

std::unique_ptr<Environment> PoolWorld::clone() const { return std::make_unique<PoolWorld>(*this); }

SpatialHash::SpatialHash(double side, double cell, std::span<const Vec2> positions)
    : cell_(cell), dim_(std::max(1, static_cast<int>(std::ceil(side / cell)))), positions_(positions) {
  buckets_.resize(static_cast<std::size_t>(dim_) * static_cast<std::size_t>(dim_));
  for (std::size_t i = 0; i < positions.size(); ++i)
    buckets_[static_cast<std::size_t>(cell_of(positions[i].y) * dim_ + cell_of(positions[i].x))].push_back(i);
}

int SpatialHash::cell_of(double v) const {
  return std::clamp(static_cast<int>(std::floor(v / cell_)), 0, dim_ - 1);
}

std::vector<std::size_t> SpatialHash::query(Vec2 center, double radius) const {
  std::vector<std::size_t> out;
  const int x0 = cell_of(center.x - radius), x1 = cell_of(center.x + radius);
  const int y0 = cell_of(center.y - radius), y1 = cell_of(center.y + radius);
  const double r2 = radius * radius;
  for (int cy = y0; cy <= y1; ++cy)
    for (int cx = x0; cx <= x1; ++cx)
      for (std::size_t i : buckets_[static_cast<std::size_t>(cy * dim_ + cx)]) {
        const Vec2 d = positions_[i] - center;
        if (dot(d, d) <= r2) out.push_back(i);
      }
  std::sort(out.begin(), out.end());
  return out;
}

SwimmerType type_of(const Individual& s) { return static_cast<SwimmerType>(s.body.tag); }

double preferred_speed(SwimmerType t, const Params& p) {
  return t == SwimmerType::Veteran ? p.veteran_speed : p.learner_speed;
}

namespace {

std::shared_ptr<const Repertoire> make_repertoire(SwimmerType type) {
  using C = Comparator;
  auto safe = Guard::atom(kSafety, C::Gt, 0.0);
  auto danger = Guard::atom(kSafety, C::Lt, 0.0);
  auto boundary = Guard::atom(kSafety, C::Eq, 0.0);
  auto r = std::make_shared<Repertoire>();
  r->appearances = {
      {"a41", AppearanceKind::Behavior, "pool.swim", 0},
      {"a42", AppearanceKind::Behavior, "pool.keep_away", 0},
  };
  if (type == SwimmerType::Veteran) {
    r->appearances.push_back({"a43", AppearanceKind::Behavior, "pool.follow_tide", 0});
    r->dominations = {
        {"a41", safe},
        {"a42", (danger && Guard::atom(kUncrowded, C::Ge, 0.0)) || boundary},
        {"a43", danger && Guard::atom(kUncrowded, C::Lt, 0.0)},
    };
  } else {
    r->dominations = {{"a41", safe}, {"a42", Guard::atom(kSafety, C::Le, 0.0)}};
  }
  return r;
}

const std::shared_ptr<const Repertoire>& repertoire_for(SwimmerType type) {
  static const auto learner = make_repertoire(SwimmerType::Learner);
  static const auto veteran = make_repertoire(SwimmerType::Veteran);
  return type == SwimmerType::Veteran ? veteran : learner;
}

}  // namespace

Individual make_swimmer(IndividualId id, SwimmerType type, Vec2 position, double heading, const Params& p) {
  Individual s;
  s.id = id;
  s.contradictions = {
      {kSafety, "Distance safety", "Collision dangerousness", Strength(1.0)},
      {kUncrowded, "Uncrowdedness", "Crowdedness", Strength(1.0)},
  };
  s.repertoire = repertoire_for(type);
  s.body.position = position;
  s.body.heading = heading;
  s.body.slots[kCourse] = heading;
  s.body.speed = preferred_speed(type, p);
  s.body.tag = static_cast<std::int64_t>(type);
  return s;
}

bool in_cone(Vec2 pos, double heading, Vec2 target, const Params& p) {
  const Vec2 rel = target - pos;
  if (rel == Vec2{}) return true;
  const double off = std::abs(wrap_angle(std::atan2(rel.y, rel.x) - heading));
  return off <= deg2rad(p.cone_half_angle);
}

double wall_distance_in_cone(Vec2 pos, double heading, const Params& p) {
  const double half = deg2rad(p.cone_half_angle);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t w = 0; w < 4; ++w) {
    const Vec2 out = kInward[w] * -1.0;
    // Smallest angle between the cone and the outward normal decides the nearest wall point seen.
    const double off = std::abs(wrap_angle(std::atan2(out.y, out.x) - heading));
    const double tilt = std::max(0.0, off - half);
    if (tilt >= std::numbers::pi / 2) continue;
    best = std::min(best, gap_to(w, pos, p.side) / std::cos(tilt));
  }
  return best;
}

double update_safety(double obstacle_distance, const Params& p) {
  if (!std::isfinite(obstacle_distance)) return 1.0;
  return Strength::clamp((obstacle_distance - p.d_safe) / p.d_safe);
}

double update_crowding(std::size_t neighbors, double speed) {
  const double t = std::numbers::pi * speed * speed;
  return Strength::clamp((t - static_cast<double>(neighbors)) / t);
}

std::string swimmer_behavior(double safety, double uncrowded, SwimmerType type, const Params& p) {
  Individual probe = make_swimmer(0, type, {}, 0.0, p);
  probe.contradictions[0].strength.set(safety);
  probe.contradictions[1].strength.set(uncrowded);
  for (const auto& a : probe.appearances())
    if (is_visible(probe, a.id)) return a.id;
  return {};
}

double wall_turn(SwimmerType type, Vec2 pos, double heading, Rng& rng, const Params& p) {
  if (ray_to_wall(pos, heading, p.side) >= p.d_safe) return heading;
  if (type == SwimmerType::Veteran) {
    // Left turn onto the counter-clockwise run along the wall being approached.
    const Vec2 d = unit(heading);
    std::size_t wall = 0;
    double first = std::numeric_limits<double>::infinity();
    for (std::size_t w = 0; w < 4; ++w) {
      const double approach = -dot(d, kInward[w]);
      if (approach > 1e-12 && gap_to(w, pos, p.side) / approach < first) {
        first = gap_to(w, pos, p.side) / approach;
        wall = w;
      }
    }
    const Vec2 in = kInward[wall];
    heading = std::atan2(-in.x, in.y);  // inward normal rotated clockwise
    for (int i = 0; i < 3 && ray_to_wall(pos, heading, p.side) < p.d_safe; ++i)
      heading = wrap_angle(heading + std::numbers::pi / 2);
    return heading;
  }
  Vec2 inward{};
  const Vec2 d = unit(heading);
  for (std::size_t w = 0; w < 4; ++w)
    if (dot(d, kInward[w]) < 0.0 && gap_to(w, pos, p.side) < p.d_safe / std::max(-dot(d, kInward[w]), 1e-12))
      inward += kInward[w];
  if (inward == Vec2{}) inward = d * -1.0;
  const double base = std::atan2(inward.y, inward.x);
  // Open interval keeps the rebound strictly inward.
  double off = rng.uniform(-std::numbers::pi / 2, std::numbers::pi / 2);
  if (std::abs(off) >= std::numbers::pi / 2) off = 0.0;
  return wrap_angle(base + off);
}

LoopResult detect_loop(const Swarm& swarm, const Params& p) {
  LoopResult r;
  const Vec2 center{p.side / 2, p.side / 2};
  std::vector<Vec2> veterans;
  double tangential = 0.0;
  for (const auto& s : swarm.individuals) {
    if (type_of(s) != SwimmerType::Veteran) continue;
    const Vec2 pos = s.body.position.value_or(center);
    veterans.push_back(pos);
    const Vec2 rel = pos - center;
    if (rel == Vec2{}) continue;
    tangential += cross(rel * (1.0 / norm(rel)), unit(s.body.heading.value_or(0.0)));
  }
  if (veterans.size() < 2) return r;
  r.order = std::abs(tangential / static_cast<double>(veterans.size()));

  SpatialHash hash(p.side, p.sense_radius, veterans);
  double sum = 0.0;
  std::size_t learners = 0;
  for (const auto& s : swarm.individuals) {
    if (type_of(s) != SwimmerType::Learner) continue;
    const Vec2 pos = s.body.position.value_or(center);
    double nearest = std::numeric_limits<double>::infinity();
    for (double radius = p.sense_radius; !std::isfinite(nearest); radius *= 2) {
      for (std::size_t v : hash.query(pos, radius)) nearest = std::min(nearest, distance(pos, veterans[v]));
      if (radius > 2 * p.side) break;
    }
    sum += nearest;
    ++learners;
  }
  if (learners > 0) r.separation = sum / static_cast<double>(learners);
  r.formed = r.order >= p.loop_threshold && r.separation >= p.d_safe;
  return r;
}

void register_rules(Rulebook& rules, const Params& p) {
  rules.add_relevance_builder("pool.neighbors", [p](const BuildContext& ctx) {
    const auto& inds = ctx.swarm.individuals;
    const std::size_t n = inds.size();
    std::vector<Vec2> positions(n);
    for (std::size_t i = 0; i < n; ++i) positions[i] = inds[i].body.position.value_or(Vec2{});
    const double radius = query_radius(p);
    const SpatialHash hash(p.side, radius, positions);
    std::vector<Relevance> out(2 * n);
    const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (ctx.policy == ExecutionPolicy::Parallel)
    for (std::ptrdiff_t k = 0; k < count; ++k) {
      const auto i = static_cast<std::size_t>(k);
      const Individual& s = inds[i];
      const double heading = s.body.heading.value_or(0.0);
      Relevance ahead{s.id, {}, {"distance"}};
      Relevance around{s.id, {}, {"density"}};
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j : hash.query(positions[i], radius)) {
        if (j == i) continue;
        around.related_ids.push_back(inds[j].id);
        if (!in_cone(positions[i], heading, positions[j], p)) continue;
        const double d = distance(positions[i], positions[j]);
        if (d < best) {
          best = d;
          ahead.related_ids.assign(1, inds[j].id);
        }
      }
      out[2 * i] = std::move(ahead);
      out[2 * i + 1] = std::move(around);
    }
    return out;
  });

  rules.add_interaction("pool.sense", [p](const InteractionContext& ctx, StrengthUpdates& up) {
    const Body& self = ctx.central.body;
    const Vec2 pos = self.position.value_or(Vec2{});
    const auto& factors = ctx.relevance.factor_ids;
    auto has = [&](const char* f) { return std::find(factors.begin(), factors.end(), f) != factors.end(); };
    if (has("distance")) {
      double d = wall_distance_in_cone(pos, self.heading.value_or(0.0), p);
      for (const Individual* o : ctx.related) d = std::min(d, distance(pos, o->body.position.value_or(Vec2{})));
      up.assign(kSafety, update_safety(d, p));
    }
    if (has("density")) {
      const double reach = preferred_speed(type_of(ctx.central), p) * p.tick;
      const auto n = static_cast<std::size_t>(std::count_if(ctx.related.begin(), ctx.related.end(),
          [&](const Individual* o) { return distance(pos, o->body.position.value_or(Vec2{})) <= reach; }));
      up.assign(kUncrowded, update_crowding(n, preferred_speed(type_of(ctx.central), p)));
    }
  });

  // Body slot 0 holds the intended course; avoidance only offsets this tick's heading from it.
  auto finish = [p](EffectContext& ctx, Individual& next, double course, double offset, double speed) {
    const Vec2 pos = ctx.self().body.position.value_or(Vec2{});
    course = wall_turn(type_of(ctx.self()), pos, wrap_angle(course), ctx.rng, p);
    double heading = wrap_angle(course + offset);
    if (ray_to_wall(pos, heading, p.side) < p.d_safe) heading = course;
    next.body.slots[kCourse] = course;
    next.body.heading = heading;
    next.body.speed = speed;
  };

  // Nobody ahead to keep pace with: the course drifts.
  auto wander = [p](EffectContext& ctx) {
    const Relevance* ahead = find_relevance(ctx.relevancies, "distance");
    if (p.heading_noise <= 0.0 || (ahead != nullptr && !ahead->related_ids.empty())) return 0.0;
    return p.heading_noise * ctx.rng.normal();
  };

  rules.add_effect("pool.swim", [p, finish, wander](EffectContext& ctx, Individual& next) {
    const Individual& self = ctx.self();
    finish(ctx, next, self.body.slots[kCourse] + wander(ctx), 0.0, preferred_speed(type_of(self), p));
  });

  rules.add_effect("pool.keep_away", [p, finish, wander](EffectContext& ctx, Individual& next) {
    const Individual& self = ctx.self();
    const Vec2 pos = self.body.position.value_or(Vec2{});
    const double course = self.body.slots[kCourse] + wander(ctx);
    double offset = 0.0;
    if (const Relevance* around = find_relevance(ctx.relevancies, "density")) {
      const Individual* nearest = nullptr;
      double best = std::numeric_limits<double>::infinity();
      for (IndividualId rid : around->related_ids) {
        const Individual& o = ctx.previous_of(rid);
        if (type_of(o) == type_of(self)) continue;
        const double d = distance(pos, o.body.position.value_or(Vec2{}));
        if (d < best && d <= p.sense_radius) {
          best = d;
          nearest = &o;
        }
      }
      if (nearest != nullptr && best > 0.0) {
        const Vec2 rel = nearest->body.position.value_or(Vec2{}) - pos;
        const double bearing = wrap_angle(std::atan2(rel.y, rel.x) - course);
        // Only someone ahead is worth dodging; sidestep to the side away from them.
        if (std::abs(bearing) < std::numbers::pi / 2)
          offset = -(bearing >= 0.0 ? 1.0 : -1.0) * deg2rad(p.steer_angle);
      }
    }
    finish(ctx, next, course, offset, preferred_speed(type_of(self), p) / 2);
  });

  rules.add_effect("pool.follow_tide", [p, finish](EffectContext& ctx, Individual& next) {
    const Individual& self = ctx.self();
    const Vec2 pos = self.body.position.value_or(Vec2{});
    Vec2 sum = unit(self.body.slots[kCourse]);
    if (const Relevance* around = find_relevance(ctx.relevancies, "density"))
      for (IndividualId rid : around->related_ids) {
        const Individual& o = ctx.previous_of(rid);
        if (type_of(o) == SwimmerType::Veteran && distance(pos, o.body.position.value_or(Vec2{})) <= p.sense_radius)
          sum += unit(o.body.heading.value_or(0.0));
      }
    const double course = sum == Vec2{} ? self.body.slots[kCourse] : std::atan2(sum.y, sum.x);
    // Keeps pace with the tide without closing on the swimmer ahead.
    const double pace = std::clamp(1.0 + self.contradictions[0].strength.value(), 0.0, 1.0);
    finish(ctx, next, course, 0.0, preferred_speed(type_of(self), p) * pace);
  });

  rules.add_dynamics("pool.move", [p](Swarm& swarm, const DynamicsContext&) {
    for (auto& s : swarm.individuals) {
      const Vec2 step = unit(s.body.heading.value_or(0.0)) * (s.body.speed.value_or(0.0) * p.tick);
      Vec2 pos = s.body.position.value_or(Vec2{}) + step;
      pos.x = std::clamp(pos.x, 0.0, p.side);
      pos.y = std::clamp(pos.y, 0.0, p.side);
      s.body.position = pos;
    }
  });
}

Swarm make_swarm(const Params& p, std::uint64_t seed) {
  if (p.swimmers < 0) throw ConfigurationError("pool.swimmers must be non-negative");
  if (!(p.veteran_fraction >= 0.0 && p.veteran_fraction <= 1.0))
    throw ConfigurationError("pool.veteran_fraction must lie in [0, 1]");
  if (!(p.d_safe > 0.0 && p.sense_radius > 0.0 && p.tick > 0.0))
    throw ConfigurationError("pool distances and tick must be positive");
  if (!(p.side > 2.0 * p.d_safe)) throw ConfigurationError("pool.side must exceed twice d_safe");
  Swarm swarm;
  swarm.environment = std::make_unique<PoolWorld>(p.side);
  const auto veterans = static_cast<int>(std::lround(p.swimmers * p.veteran_fraction));
  for (int i = 0; i < p.swimmers; ++i) {
    const auto id = static_cast<IndividualId>(i);
    Rng rng = Rng::substream(seed, id, 0, Stream::Setup);
    const Vec2 pos{rng.uniform(0.0, p.side), rng.uniform(0.0, p.side)};
    const double heading = rng.uniform(-std::numbers::pi, std::numbers::pi);
    swarm.individuals.push_back(
        make_swimmer(id, i < veterans ? SwimmerType::Veteran : SwimmerType::Learner, pos, heading, p));
  }
  swarm.relevance_builder_id = "pool.neighbors";
  swarm.interaction_rule_ids = {"pool.sense"};
  swarm.dynamics_ids = {"pool.move"};
  return swarm;
}

EmergenceSpec emergence_spec(const Params& p) {
  using C = Comparator;
  auto danger = Guard::atom(kSafety, C::Lt, 0.0);
  EmergenceSpec spec;
  spec.configs = {
      {"H41", "swimming speedily", Guard::atom(kSafety, C::Gt, 0.0)},
      {"H42", "keeping away", danger && Guard::atom(kUncrowded, C::Gt, 0.0)},
      {"H43", "following the tide", danger && Guard::atom(kUncrowded, C::Lt, 0.0)},
  };
  spec.metrics["pool.order_parameter"] = [p](const Swarm& s) -> std::optional<double> {
    return detect_loop(s, p).order;
  };
  spec.metrics["pool.separation"] = [p](const Swarm& s) -> std::optional<double> {
    const double v = detect_loop(s, p).separation;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
  };
  VerticalPattern v41;
  v41.id = "V41";
  v41.quantifier = Quantifier::ForAll;
  v41.witness = Guard(true);
  v41.metric_id = "pool.order_parameter";
  v41.checks = {{"pool.order_parameter", C::Ge, p.loop_threshold}, {"pool.separation", C::Ge, p.d_safe}};
  spec.patterns = {std::move(v41)};
  spec.required = {"V41"};
  return spec;
}

}  // namespace contra::pool
