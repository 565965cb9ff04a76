#include "contra/ants.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <numeric>

namespace contra::ants {

namespace {

// Counter-clockwise from east; also the fixed tie-break order.
constexpr std::array<Cell, 8> kNeighbors{{{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};

bool in_rect(Cell c, int x0, int y0, int x1, int y1) {
  return c.x >= x0 && c.x <= x1 && c.y >= y0 && c.y <= y1;
}

Cell clamp_cell(const AntWorld& w, Cell c) {
  return {std::clamp(c.x, 0, w.width() - 1), std::clamp(c.y, 0, w.height() - 1)};
}

void move_to(Individual& ant, const AntWorld& world, Cell target) {
  const Cell from = cell_of(ant.body);
  const Cell to = clamp_cell(world, target);
  Vec2 h = home_vector(ant.body) + Vec2{double(to.x - from.x), double(to.y - from.y)};
  if (world.in_nest(to)) h = {};
  set_cell(ant.body, to);
  set_home_vector(ant.body, h);
}

void set_idleness(Individual& ant, double value) {
  ant.contradictions[ant.contradiction_index(kIdleness)].strength.set(value);
}

}  // namespace

void bind(Params& p, ParamSet& set) {
  set.bind("ants.width", p.width);
  set.bind("ants.height", p.height);
  set.bind("ants.nest_x0", p.nest_x0);
  set.bind("ants.nest_y0", p.nest_y0);
  set.bind("ants.nest_x1", p.nest_x1);
  set.bind("ants.nest_y1", p.nest_y1);
  set.bind("ants.food_x0", p.food_x0);
  set.bind("ants.food_y0", p.food_y0);
  set.bind("ants.food_x1", p.food_x1);
  set.bind("ants.food_y1", p.food_y1);
  set.bind("ants.ants", p.ants);
  set.bind("ants.deposit_amount", p.deposit_amount);
  set.bind("ants.evaporation_factor", p.evaporation_factor);
  set.bind("ants.presence_threshold", p.presence_threshold);
}

AntWorld::AntWorld(const Params& p) : params_(p), width_(p.width), height_(p.height) {
  if (width_ <= 0 || height_ <= 0) throw ConfigurationError("ant grid must be non-empty");
  if (!(p.evaporation_factor > 0.0 && p.evaporation_factor <= 1.0))
    throw ConfigurationError("ants.evaporation_factor must lie in (0, 1]");
  if (!(p.deposit_amount > 0.0)) throw ConfigurationError("ants.deposit_amount must be positive");
  if (!(p.presence_threshold > 0.0))
    throw ConfigurationError("ants.presence_threshold must be positive");
  const bool overlap = p.nest_x0 <= p.food_x1 && p.food_x0 <= p.nest_x1 &&
                       p.nest_y0 <= p.food_y1 && p.food_y0 <= p.nest_y1;
  if (overlap) throw ConfigurationError("nest and food regions overlap");
  grid_.assign(static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_), 0.0);
}

std::unique_ptr<Environment> AntWorld::clone() const { return std::make_unique<AntWorld>(*this); }

void AntWorld::apply_edit(const EnvironmentEdit& edit) {
  if (edit.key >= grid_.size()) throw BoundsError("pheromone edit outside the grid");
  grid_[edit.key] += edit.amount;
}

bool AntWorld::contains(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }

std::size_t AntWorld::index(Cell c) const {
  if (!contains(c))
    throw BoundsError("cell (" + std::to_string(c.x) + ", " + std::to_string(c.y) +
                      ") outside the grid");
  return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(c.x);
}

bool AntWorld::in_nest(Cell c) const {
  return in_rect(c, params_.nest_x0, params_.nest_y0, params_.nest_x1, params_.nest_y1);
}

bool AntWorld::in_food(Cell c) const {
  return in_rect(c, params_.food_x0, params_.food_y0, params_.food_x1, params_.food_y1);
}

bool AntWorld::marked(Cell c) const { return pheromone(c) > params_.presence_threshold; }

double AntWorld::pheromone(Cell c) const { return grid_[index(c)]; }

void AntWorld::set_pheromone(Cell c, double value) { grid_[index(c)] = std::max(0.0, value); }

double AntWorld::total_pheromone() const { return std::accumulate(grid_.begin(), grid_.end(), 0.0); }

const char* appearance_id(Behavior b) {
  switch (b) {
    case Behavior::RandomMove: return "a11";
    case Behavior::FollowTrail: return "a12";
    case Behavior::Homeward: return "a13";
    case Behavior::Load: return "a14";
    case Behavior::Unload: return "a15";
    case Behavior::None: return "";
  }
  return "";
}

std::shared_ptr<const Repertoire> repertoire() {
  static const auto rep = [] {
    using C = Comparator;
    auto idle = Guard::atom(kIdleness, C::Eq, 1.0);
    auto loaded = Guard::atom(kIdleness, C::Eq, -1.0);
    auto place = [](C op, double v) { return Guard::atom(kSpecialness, op, v); };

    auto r = std::make_shared<Repertoire>();
    auto add = [&](const char* id, const char* effect, Guard g) {
      r->appearances.push_back({id, AppearanceKind::Behavior, std::string(effect), 0});
      r->dominations.push_back({id, std::move(g)});
    };
    // An idle ant standing in the nest matches no other guard; it wanders out like an ordinary one.
    add("a11", "ants.random_move", idle && (place(C::Eq, kOrdinary) || place(C::Eq, kAtNest)));
    add("a12", "ants.follow_trail", idle && place(C::Eq, kOnPheromone));
    add("a13", "ants.homeward", loaded && place(C::Ne, kAtNest));
    add("a14", "ants.load", idle && place(C::Eq, kAtFood));
    add("a15", "ants.unload", loaded && place(C::Eq, kAtNest));
    return std::shared_ptr<const Repertoire>(std::move(r));
  }();
  return rep;
}

Individual make_ant(IndividualId id, Cell cell) {
  Individual ant;
  ant.id = id;
  ant.contradictions = {
      {kIdleness, "Idleness", "Busyness", Strength(1.0)},
      {kSpecialness, "Ordinariness", "Specialness", Strength(kOrdinary)},
  };
  ant.repertoire = repertoire();
  set_cell(ant.body, cell);
  set_home_vector(ant.body, {});
  return ant;
}

Cell cell_of(const Body& body) {
  const Vec2 p = body.position.value_or(Vec2{});
  return {static_cast<int>(std::lround(p.x)), static_cast<int>(std::lround(p.y))};
}

Vec2 home_vector(const Body& body) { return {body.slots[0], body.slots[1]}; }

void set_cell(Body& body, Cell cell) { body.position = Vec2{double(cell.x), double(cell.y)}; }

void set_home_vector(Body& body, Vec2 h) {
  body.slots[0] = h.x;
  body.slots[1] = h.y;
}

double sense_place(Cell cell, const AntWorld& world) {
  if (!world.contains(cell))
    throw BoundsError("ant at (" + std::to_string(cell.x) + ", " + std::to_string(cell.y) +
                      ") is outside the grid");
  if (world.in_nest(cell)) return kAtNest;
  if (world.in_food(cell)) return kAtFood;
  if (world.marked(cell)) return kOnPheromone;
  return kOrdinary;
}

Behavior ant_behavior(double idleness, double specialness) {
  Individual probe = make_ant(0, {});
  probe.contradictions[0].strength.set(idleness);
  probe.contradictions[1].strength.set(specialness);
  static constexpr std::array<Behavior, 5> kOrder{Behavior::RandomMove, Behavior::FollowTrail,
                                                  Behavior::Homeward, Behavior::Load,
                                                  Behavior::Unload};
  for (Behavior b : kOrder)
    if (is_visible(probe, appearance_id(b))) return b;
  return Behavior::None;
}

void apply_ant_behavior(Individual& ant, Behavior behavior, const AntWorld& world, Rng& rng,
                        std::vector<EnvironmentEdit>& edits) {
  const Cell here = cell_of(ant.body);
  switch (behavior) {
    case Behavior::RandomMove: {
      const Cell d = kNeighbors[rng.below(kNeighbors.size())];
      move_to(ant, world, {here.x + d.x, here.y + d.y});
      break;
    }
    case Behavior::FollowTrail: {
      // Ascend the pheromone among marked neighbours that lead away from home.
      const Vec2 h = home_vector(ant.body);
      std::optional<Cell> best;
      double best_level = 0.0, best_outward = 0.0;
      for (const Cell d : kNeighbors) {
        const Cell c{here.x + d.x, here.y + d.y};
        if (!world.contains(c) || !world.marked(c)) continue;
        const double outward = dot(h, Vec2{double(d.x), double(d.y)});
        if (outward <= 0.0) continue;
        const double level = world.pheromone(c);
        if (!best || level > best_level || (level == best_level && outward > best_outward)) {
          best = c;
          best_level = level;
          best_outward = outward;
        }
      }
      if (best) {
        move_to(ant, world, *best);
      } else {
        const Cell d = kNeighbors[rng.below(kNeighbors.size())];
        move_to(ant, world, {here.x + d.x, here.y + d.y});
      }
      break;
    }
    case Behavior::Homeward: {
      const Vec2 h = home_vector(ant.body);
      std::optional<Cell> best;
      double best_norm = norm(h);
      for (const Cell d : kNeighbors) {
        const Cell c{here.x + d.x, here.y + d.y};
        if (!world.contains(c)) continue;
        const double n = norm(h + Vec2{double(d.x), double(d.y)});
        if (n < best_norm) {
          best = c;
          best_norm = n;
        }
      }
      edits.push_back({world.index(here), world.params().deposit_amount});
      if (best) move_to(ant, world, *best);
      break;
    }
    case Behavior::Load:
      set_idleness(ant, -1.0);
      break;
    case Behavior::Unload:
      set_idleness(ant, 1.0);
      break;
    case Behavior::None:
      break;
  }
}

void evaporate(AntWorld& world) {
  const double f = world.params().evaporation_factor;
  for (int y = 0; y < world.height(); ++y)
    for (int x = 0; x < world.width(); ++x) {
      const double v = world.pheromone({x, y}) * f;
      world.set_pheromone({x, y}, v < 1e-6 ? 0.0 : v);
    }
}

TrailResult detect_trail(const AntWorld& world) {
  const int w = world.width(), h = world.height();
  std::vector<int> dist(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), -1);
  std::deque<Cell> frontier;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (world.in_nest({x, y})) {
        dist[world.index({x, y})] = 0;
        frontier.push_back({x, y});
      }
  while (!frontier.empty()) {
    const Cell c = frontier.front();
    frontier.pop_front();
    const int dc = dist[world.index(c)];
    for (const Cell d : kNeighbors) {
      const Cell n{c.x + d.x, c.y + d.y};
      if (!world.contains(n)) continue;
      auto& dn = dist[world.index(n)];
      if (dn >= 0) continue;
      if (world.in_food(n)) return {true, dc + 1};
      if (!world.marked(n)) continue;
      dn = dc + 1;
      frontier.push_back(n);
    }
  }
  return {false, std::nullopt};
}

void register_rules(Rulebook& rules) {
  rules.add_relevance_builder("ants.place", [](const BuildContext& ctx) {
    std::vector<Relevance> out;
    out.reserve(ctx.swarm.individuals.size());
    for (const auto& ant : ctx.swarm.individuals)
      out.push_back({ant.id, {}, {"pheromone", "nest", "food"}});
    return out;
  });
  rules.add_interaction("ants.sense_place", [](const InteractionContext& ctx, StrengthUpdates& up) {
    const auto& world = ctx.swarm.environment_as<AntWorld>();
    up.assign(kSpecialness, sense_place(cell_of(ctx.central.body), world));
  });

  auto effect = [](Behavior b) {
    return [b](EffectContext& ctx, Individual& next) {
      apply_ant_behavior(next, b, ctx.previous.environment_as<AntWorld>(), ctx.rng, ctx.edits);
    };
  };
  rules.add_effect("ants.random_move", effect(Behavior::RandomMove));
  rules.add_effect("ants.follow_trail", effect(Behavior::FollowTrail));
  rules.add_effect("ants.homeward", effect(Behavior::Homeward));
  rules.add_effect("ants.load", effect(Behavior::Load));
  rules.add_effect("ants.unload", effect(Behavior::Unload));
  rules.add_dynamics("ants.evaporate",
                     [](Swarm& swarm, const DynamicsContext&) { evaporate(swarm.environment_as<AntWorld>()); });
}

Swarm make_swarm(const Params& p, std::uint64_t seed) {
  if (p.ants < 0) throw ConfigurationError("ants.ants must be non-negative");
  Swarm swarm;
  auto world = std::make_unique<AntWorld>(p);
  std::vector<Cell> nest;
  for (int y = p.nest_y0; y <= p.nest_y1; ++y)
    for (int x = p.nest_x0; x <= p.nest_x1; ++x)
      if (world->contains({x, y})) nest.push_back({x, y});
  if (nest.empty() && p.ants > 0) throw ConfigurationError("nest region lies outside the grid");
  for (int i = 0; i < p.ants; ++i) {
    const auto id = static_cast<IndividualId>(i);
    Rng rng = Rng::substream(seed, id, 0, Stream::Setup);
    const Cell c = nest[rng.below(nest.size())];
    Individual ant = make_ant(id, c);
    ant.contradictions[1].strength.set(sense_place(c, *world));
    swarm.individuals.push_back(std::move(ant));
  }
  swarm.environment = std::move(world);
  swarm.relevance_builder_id = "ants.place";
  swarm.interaction_rule_ids = {"ants.sense_place"};
  swarm.dynamics_ids = {"ants.evaporate"};
  return swarm;
}

EmergenceSpec emergence_spec() {
  using C = Comparator;
  EmergenceSpec spec;
  spec.configs = {
      {"H11", "loaded", Guard::atom(kIdleness, C::Eq, -1.0)},
      {"H12", "following pheromone",
       Guard::atom(kIdleness, C::Eq, 1.0) && Guard::atom(kSpecialness, C::Eq, kOnPheromone)},
      {"H13", "moving randomly",
       Guard::atom(kIdleness, C::Eq, 1.0) && Guard::atom(kSpecialness, C::Eq, kOrdinary)},
  };
  spec.metrics["ants.trail_length"] = [](const Swarm& s) -> std::optional<double> {
    const auto trail = detect_trail(s.environment_as<AntWorld>());
    if (!trail.length) return std::nullopt;
    return static_cast<double>(*trail.length);
  };
  spec.metrics["ants.fraction_on_trail"] = [](const Swarm& s) -> std::optional<double> {
    return fraction_on_trail(s);
  };
  VerticalPattern v11;
  v11.id = "V11";
  v11.quantifier = Quantifier::Exists;
  v11.witness = Guard::atom(kSpecialness, C::Lt, 0.0);
  v11.metric_id = "ants.trail_length";
  v11.checks = {{"ants.trail_length", C::Ge, 1.0}};
  spec.patterns = {std::move(v11)};
  spec.required = {"V11"};
  return spec;
}

double fraction_on_trail(const Swarm& swarm) {
  if (swarm.individuals.empty()) return 0.0;
  std::size_t n = 0;
  for (const auto& ant : swarm.individuals)
    if (ant.strength(kSpecialness) == kOnPheromone) ++n;
  return static_cast<double>(n) / static_cast<double>(swarm.individuals.size());
}

}  // namespace contra::ants
