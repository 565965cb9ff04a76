#include "contra/geese.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace contra::geese {

namespace {

// Body slots hold this tick's motion commands: [0] speed along the migration
// heading, [1] lateral speed (positive to the left of it).
constexpr std::size_t kAlong = 0;
constexpr std::size_t kAcross = 1;

std::size_t index_of(const Individual& g, const char* cid) { return g.contradiction_index(cid); }

double value(const Individual& g, const char* cid) {
  return g.contradictions[index_of(g, cid)].strength.value();
}

void set_value(Individual& g, const char* cid, double v) {
  g.contradictions[index_of(g, cid)].strength.set(v);
}

}  // namespace

void bind(Params& p, ParamSet& set) {
  set.bind("geese.herd_size", p.herd_size);
  set.bind("geese.d_safe", p.d_safe);
  set.bind("geese.d_scale", p.d_scale);
  set.bind("geese.theta_max", p.theta_max);
  set.bind("geese.theta_comfort", p.theta_comfort);
  set.bind("geese.theta_scale", p.theta_scale);
  set.bind("geese.cruise_speed", p.cruise_speed);
  set.bind("geese.speed_delta", p.speed_delta);
  set.bind("geese.lateral_speed", p.lateral_speed);
  set.bind("geese.drain_rate", p.drain_rate);
  set.bind("geese.recover_rate", p.recover_rate);
  set.bind("geese.tick", p.tick);
  set.bind("geese.init_box", p.init_box);
  set.bind("geese.migration_heading", p.migration_heading);
  set.bind("geese.formation_epsilon", p.formation_epsilon);
  set.bind("geese.lateral_guard_on_spirit", p.lateral_guard_on_spirit);
}

std::shared_ptr<const Repertoire> repertoire(const Params& p) {
  using C = Comparator;
  auto leading = Guard::atom(kLeading, C::Eq, 1.0);
  auto following = Guard::atom(kLeading, C::Eq, -1.0);
  const char* lateral_cid = p.lateral_guard_on_spirit ? kSpirit : kProtection;

  auto r = std::make_shared<Repertoire>();
  auto add = [&](const char* id, const char* effect, int channel, Guard g) {
    r->appearances.push_back({id, AppearanceKind::Behavior, std::string(effect), channel});
    r->dominations.push_back({id, std::move(g)});
  };
  add("a31", "geese.lead", 0, leading && Guard::atom(kSpirit, C::Gt, 0.0));
  add("a32", "geese.quicken", 0, following && Guard::atom(kSpacing, C::Gt, 0.0));
  add("a33", "geese.slow", 0,
      (leading && Guard::atom(kSpirit, C::Lt, 0.0)) ||
          (following && Guard::atom(kSpacing, C::Lt, 0.0)));
  add("a34", "geese.inwards", 1, following && Guard::atom(lateral_cid, C::Gt, 0.0));
  add("a35", "geese.outwards", 1, following && Guard::atom(lateral_cid, C::Lt, 0.0));
  return r;
}

Individual make_goose(IndividualId id, Vec2 position, double heading, bool leader, const Params& p) {
  Individual g;
  g.id = id;
  g.contradictions = {
      {kLeading, "Leading", "Following", Strength(leader ? 1.0 : -1.0)},
      {kSpirit, "Spiritedness", "Tiredness", Strength(1.0)},
      {kSpacing, "Energy-saving", "Distance-safety", Strength(0.0)},
      {kProtection, "Freedom", "Protection", Strength(0.0)},
  };
  g.repertoire = repertoire(p);
  g.body.position = position;
  g.body.heading = heading;
  g.body.speed = p.cruise_speed;
  g.body.slots[kAlong] = p.cruise_speed;
  g.body.slots[kAcross] = 0.0;
  return g;
}

bool is_leader(const Individual& g) { return value(g, kLeading) == 1.0; }

const Individual* leader_of(const Swarm& herd) {
  for (const auto& g : herd.individuals)
    if (is_leader(g)) return &g;
  return nullptr;
}

const Individual* preceding_of(const Swarm& herd, const Individual& g) {
  const Vec2 pos = g.body.position.value_or(Vec2{});
  const Vec2 fwd = unit(g.body.heading.value_or(0.0));
  const Individual* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& o : herd.individuals) {
    if (o.id == g.id) continue;
    const Vec2 rel = o.body.position.value_or(Vec2{}) - pos;
    if (dot(rel, fwd) <= 0.0) continue;
    const double d = norm(rel);
    if (d < best_d) {
      best_d = d;
      best = &o;
    }
  }
  return best;
}

double update_following(double distance, const Params& p) {
  return Strength::clamp((distance - p.d_safe) / p.d_scale);
}

double update_protection(double theta_deg, const Params& p) {
  if (theta_deg >= p.theta_max) return 1.0;
  return Strength::clamp((theta_deg - p.theta_comfort) / p.theta_scale);
}

double update_spirit(double spirit, bool leading, const Params& p) {
  return Strength::clamp(spirit + (leading ? -p.drain_rate : p.recover_rate));
}

double vision_angle(const Body& g, Vec2 target) {
  const Vec2 rel = target - g.position.value_or(Vec2{});
  const double bearing = std::atan2(rel.y, rel.x);
  return std::abs(rad2deg(wrap_angle(bearing - g.heading.value_or(0.0))));
}

GooseBehavior goose_behavior(double leading, double spirit, double spacing, double protection,
                             const Params& p) {
  Individual probe = make_goose(0, {}, 0.0, leading == 1.0, p);
  probe.contradictions[0].strength.set(leading);
  probe.contradictions[1].strength.set(spirit);
  probe.contradictions[2].strength.set(spacing);
  probe.contradictions[3].strength.set(protection);
  GooseBehavior b;
  for (const char* id : {"a31", "a32", "a33"})
    if (is_visible(probe, id)) {
      b.longitudinal = id;
      break;
    }
  for (const char* id : {"a34", "a35"})
    if (is_visible(probe, id)) {
      b.lateral = id;
      break;
    }
  return b;
}

void leader_handoff(Swarm& herd) {
  auto& geese = herd.individuals;
  if (geese.size() < 2) return;
  Individual* old_leader = nullptr;
  Vec2 mean{};
  for (auto& g : geese) {
    if (is_leader(g)) old_leader = &g;
    mean += unit(g.body.heading.value_or(0.0));
  }
  if (old_leader == nullptr) throw InterventionError("herd has no leader to hand off from");
  if (norm(mean) == 0.0) mean = unit(old_leader->body.heading.value_or(0.0));

  Individual* front = nullptr;
  double best = -std::numeric_limits<double>::infinity();
  for (auto& g : geese) {
    if (&g == old_leader) continue;
    const double proj = dot(g.body.position.value_or(Vec2{}), mean);
    if (proj > best || (proj == best && front != nullptr && g.id < front->id)) {
      best = proj;
      front = &g;
    }
  }
  set_value(*old_leader, kLeading, -1.0);
  set_value(*front, kLeading, 1.0);
}

FormationResult detect_formation(const Swarm& herd, double epsilon) {
  FormationResult r;
  const Individual* leader = nullptr;
  std::size_t followers = 0;
  bool balanced = true;
  for (const auto& g : herd.individuals) {
    if (value(g, kLeading) == 1.0) {
      ++r.metrics.leaders;
      leader = &g;
      continue;
    }
    ++followers;
    const double s = std::abs(value(g, kSpacing));
    const double q = std::abs(value(g, kProtection));
    r.metrics.mean_abs_spacing += s;
    r.metrics.mean_abs_protection += q;
    balanced = balanced && s <= epsilon && q <= epsilon;
  }
  if (followers > 0) {
    r.metrics.mean_abs_spacing /= static_cast<double>(followers);
    r.metrics.mean_abs_protection /= static_cast<double>(followers);
  }
  r.formed = r.metrics.leaders == 1 && value(*leader, kSpirit) > 0.0 && balanced;
  return r;
}

void register_rules(Rulebook& rules, const Params& p) {
  rules.add_relevance_builder("geese.herd", [](const BuildContext& ctx) {
    const auto& herd = ctx.swarm;
    const Individual* leader = leader_of(herd);
    std::vector<Relevance> out;
    out.reserve(2 * herd.individuals.size());
    for (const auto& g : herd.individuals) {
      if (leader == nullptr || &g == leader) {
        out.push_back({g.id, {}, {"stamina"}});
        continue;
      }
      const Individual* ahead = preceding_of(herd, g);
      Relevance follow{g.id, {}, {"distance"}};
      if (ahead != nullptr) follow.related_ids.push_back(ahead->id);
      out.push_back(std::move(follow));
      out.push_back({g.id, {leader->id}, {"vision angle", "stamina"}});
    }
    return out;
  });

  rules.add_interaction("geese.sense", [p](const InteractionContext& ctx, StrengthUpdates& up) {
    const auto& factors = ctx.relevance.factor_ids;
    auto has = [&](const char* f) { return std::find(factors.begin(), factors.end(), f) != factors.end(); };
    const Body& self = ctx.central.body;
    if (has("stamina"))
      up.add(kSpirit, update_spirit(value(ctx.central, kSpirit), is_leader(ctx.central), p) -
                          value(ctx.central, kSpirit));
    if (has("distance")) {
      // Nobody ahead means the goose has overtaken the herd; it eases off until passed.
      if (ctx.related.empty())
        up.assign(kSpacing, -1.0);
      else
        up.assign(kSpacing, update_following(distance(self.position.value_or(Vec2{}),
                                                      ctx.related.front()->body.position.value_or(Vec2{})),
                                             p));
    }
    if (has("vision angle") && !ctx.related.empty())
      up.assign(kProtection,
                update_protection(vision_angle(self, ctx.related.front()->body.position.value_or(Vec2{})), p));
  });

  rules.add_effect("geese.lead", [p](EffectContext&, Individual& next) {
    next.body.slots[kAlong] = p.cruise_speed;
    next.body.slots[kAcross] = 0.0;
  });
  rules.add_effect("geese.quicken", [p](EffectContext& ctx, Individual& next) {
    next.body.slots[kAlong] = p.cruise_speed + p.speed_delta * value(ctx.self(), kSpacing);
  });
  rules.add_effect("geese.slow", [p](EffectContext& ctx, Individual& next) {
    const Individual& self = ctx.self();
    next.body.slots[kAlong] = is_leader(self) ? p.cruise_speed - p.speed_delta
                                              : p.cruise_speed + p.speed_delta * value(self, kSpacing);
  });

  auto lateral = [p](double direction) {
    return [p, direction](EffectContext& ctx, Individual& next) {
      const Individual& self = ctx.self();
      const Individual* leader = leader_of(ctx.previous);
      if (leader == nullptr) return;
      // Side of the leader's flight line the goose is on; geese on the line pick by id parity.
      const Vec2 fwd = unit(p.migration_heading);
      const double offset = cross(fwd, self.body.position.value_or(Vec2{}) -
                                           leader->body.position.value_or(Vec2{}));
      const double side = offset > 0.0 ? 1.0 : (offset < 0.0 ? -1.0 : (self.id % 2 ? 1.0 : -1.0));
      const double strength = std::abs(value(self, p.lateral_guard_on_spirit ? kSpirit : kProtection));
      next.body.slots[kAcross] = direction * side * p.lateral_speed * strength;
    };
  };
  rules.add_effect("geese.inwards", lateral(-1.0));
  rules.add_effect("geese.outwards", lateral(1.0));

  rules.add_dynamics("geese.fly", [p](Swarm& herd, const DynamicsContext&) {
    const Vec2 fwd = unit(p.migration_heading);
    const Vec2 left{-fwd.y, fwd.x};
    for (auto& g : herd.individuals) {
      const Vec2 v = fwd * g.body.slots[kAlong] + left * g.body.slots[kAcross];
      g.body.position = g.body.position.value_or(Vec2{}) + v * p.tick;
      g.body.heading = std::atan2(v.y, v.x);
      g.body.speed = norm(v);
      g.body.slots[kAlong] = p.cruise_speed;
      g.body.slots[kAcross] = 0.0;
    }
  });

  rules.add_dynamics("geese.handoff", [](Swarm& herd, const DynamicsContext& ctx) {
    for (std::size_t i = 0; i < herd.individuals.size() && i < ctx.behaviors.size(); ++i) {
      const auto& g = herd.individuals[i];
      if (is_leader(g) && ctx.behaviors[i].find("a33") != std::string::npos) {
        leader_handoff(herd);
        return;
      }
    }
  });
}

Swarm make_swarm(const Params& p, std::uint64_t seed) {
  if (p.herd_size < 0) throw ConfigurationError("geese.herd_size must be non-negative");
  if (!(p.d_scale > 0.0 && p.theta_scale > 0.0 && p.tick > 0.0))
    throw ConfigurationError("geese scales and tick must be positive");
  Swarm herd;
  Rng setup = Rng::substream(seed, kSwarmStreamId, 0, Stream::Setup);
  const auto leader = p.herd_size > 0 ? setup.below(static_cast<std::uint64_t>(p.herd_size)) : 0;
  for (int i = 0; i < p.herd_size; ++i) {
    const auto id = static_cast<IndividualId>(i);
    Rng rng = Rng::substream(seed, id, 0, Stream::Setup);
    const Vec2 pos{rng.uniform(0.0, p.init_box), rng.uniform(0.0, p.init_box)};
    const double heading = rng.uniform(-std::numbers::pi, std::numbers::pi);
    herd.individuals.push_back(make_goose(id, pos, heading, id == leader, p));
  }
  herd.relevance_builder_id = "geese.herd";
  herd.interaction_rule_ids = {"geese.sense"};
  herd.dynamics_ids = {"geese.fly", "geese.handoff"};
  return herd;
}

EmergenceSpec emergence_spec(const Params& p) {
  using C = Comparator;
  const double eps = p.formation_epsilon;
  auto leading = Guard::atom(kLeading, C::Eq, 1.0) && Guard::atom(kSpirit, C::Gt, 0.0);
  auto balanced = Guard::atom(kLeading, C::Eq, -1.0) && Guard::approx(kSpacing, 0.0, eps) &&
                  Guard::approx(kProtection, 0.0, eps);
  EmergenceSpec spec;
  spec.configs = {{"H31", "leader", leading}, {"H32", "balanced follower", balanced}};
  spec.metrics["geese.mean_abs_spacing"] = [](const Swarm& s) -> std::optional<double> {
    return detect_formation(s, 0.0).metrics.mean_abs_spacing;
  };
  spec.metrics["geese.mean_abs_protection"] = [](const Swarm& s) -> std::optional<double> {
    return detect_formation(s, 0.0).metrics.mean_abs_protection;
  };
  spec.metrics["geese.leaders"] = [](const Swarm& s) -> std::optional<double> {
    return static_cast<double>(detect_formation(s, 0.0).metrics.leaders);
  };
  VerticalPattern v31;
  v31.id = "V31";
  v31.quantifier = Quantifier::ExistsUniqueWithForAllRest;
  v31.witness = leading;
  v31.rest = balanced;
  v31.metric_id = "geese.mean_abs_spacing";
  spec.patterns = {std::move(v31)};
  spec.required = {"V31"};
  return spec;
}

}  // namespace contra::geese
