#include "contra/bees.hpp"

#include <algorithm>
#include <cmath>

namespace contra::bees {

namespace {

bool stronger(const Signal& a, const Signal& b) {
  if (a.value != b.value) return a.value > b.value;
  if (a.birth != b.birth) return a.birth > b.birth;
  return a.origin < b.origin;
}

}  // namespace

void bind(Params& p, ParamSet& set) {
  set.bind("bees.population", p.population);
  set.bind("bees.encounters_per_bee_per_tick", p.encounters_per_bee_per_tick);
  set.bind("bees.alpha", p.alpha);
  set.bind("bees.initial_low", p.initial_low);
  set.bind("bees.initial_high", p.initial_high);
  set.bind("bees.relay", p.relay);
  set.bind("bees.relay_lifetime", p.relay_lifetime);
  set.bind("bees.maturation_rate", p.maturation_rate);
  set.bind("bees.soft_saturation", p.soft_saturation);
  set.bind("bees.cyclic_pairing", p.cyclic_pairing);
}

double concentration(double gland) { return (gland + 1.0) / 2.0; }

std::pair<double, double> encounter(double gland_i, double gland_j, double alpha) {
  const double pi = concentration(gland_i), pj = concentration(gland_j);
  return {alpha * (pi - pj), alpha * (pj - pi)};
}

std::shared_ptr<const Repertoire> repertoire() {
  static const auto rep = [] {
    auto r = std::make_shared<Repertoire>();
    r->appearances = {
        {"a21", AppearanceKind::Behavior, "bees.secrete", 0},
        {"a22", AppearanceKind::Property, std::nullopt, 0},
        {"a23", AppearanceKind::Behavior, "bees.relay", 1},
    };
    r->dominations = {
        {"a21", Guard::atom(kGland, Comparator::Ne, -1.0)},
        {"a22", Guard::atom(kGland, Comparator::Gt, 0.0)},
        {"a23", Guard(true)},
    };
    return std::shared_ptr<const Repertoire>(std::move(r));
  }();
  return rep;
}

Individual make_bee(IndividualId id, double gland) {
  Individual bee;
  bee.id = id;
  bee.contradictions = {{kGland, "Development", "Degeneration", Strength(gland)}};
  bee.repertoire = repertoire();
  set_carried(bee.body, {concentration(bee.contradictions[0].strength.value()), 0, id});
  return bee;
}

Signal carried(const Body& body) {
  return {body.slots[0], static_cast<std::uint64_t>(body.slots[1]), static_cast<IndividualId>(body.tag)};
}

void set_carried(Body& body, const Signal& s) {
  body.slots[0] = s.value;
  body.slots[1] = static_cast<double>(s.birth);
  body.tag = static_cast<std::int64_t>(s.origin);
}

Signal presented(const Individual& bee, std::uint64_t tick, const Params& p) {
  const Signal held = carried(bee.body);
  const double own = concentration(bee.contradictions[0].strength.value());
  const bool expired = tick > held.birth + static_cast<std::uint64_t>(std::max(p.relay_lifetime, 0));
  if (expired || own >= held.value) return {own, tick, bee.id};
  return held;
}

std::vector<std::pair<std::size_t, std::size_t>> pair_encounters(std::size_t population,
                                                                 const Params& p,
                                                                 std::uint64_t tick, Rng& rng) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (population < 2) return pairs;
  if (p.cyclic_pairing) {
    const std::size_t total = population * (population - 1) / 2;
    std::size_t k = (tick == 0 ? 0 : tick - 1) % total;
    for (std::size_t i = 0; i + 1 < population; ++i) {
      const std::size_t row = population - 1 - i;
      if (k < row) {
        pairs.emplace_back(i, i + 1 + k);
        break;
      }
      k -= row;
    }
    return pairs;
  }
  const auto draws = static_cast<std::size_t>(static_cast<double>(population) *
                                              p.encounters_per_bee_per_tick / 2.0);
  pairs.reserve(draws);
  for (std::size_t k = 0; k < draws; ++k) {
    const auto i = static_cast<std::size_t>(rng.below(population));
    auto j = static_cast<std::size_t>(rng.below(population - 1));
    if (j >= i) ++j;
    pairs.emplace_back(i, j);
  }
  return pairs;
}

std::size_t count_potential_queens(const Swarm& colony) {
  return static_cast<std::size_t>(std::count_if(
      colony.individuals.begin(), colony.individuals.end(),
      [](const Individual& b) { return b.contradictions[0].strength.value() > 0.0; }));
}

void kill_queen(Swarm& colony) {
  const auto n = count_potential_queens(colony);
  if (n != 1)
    throw InterventionError("kill_queen needs exactly one potential queen, found " +
                            std::to_string(n));
  auto& inds = colony.individuals;
  inds.erase(std::find_if(inds.begin(), inds.end(), [](const Individual& b) {
    return b.contradictions[0].strength.value() > 0.0;
  }));
}

void register_rules(Rulebook& rules, const Params& p) {
  rules.add_relevance_builder("bees.encounters", [p](const BuildContext& ctx) {
    const auto& inds = ctx.swarm.individuals;
    std::vector<Relevance> out(inds.size());
    for (std::size_t i = 0; i < inds.size(); ++i) {
      out[i].central_id = inds[i].id;
      out[i].factor_ids = {"queening pheromone"};
    }
    Rng rng = ctx.swarm_rng();
    for (const auto& [i, j] : pair_encounters(inds.size(), p, ctx.tick, rng)) {
      out[i].related_ids.push_back(inds[j].id);
      out[j].related_ids.push_back(inds[i].id);
    }
    return out;
  });

  rules.add_interaction("bees.encounter", [p](const InteractionContext& ctx, StrengthUpdates& up) {
    const double gland = ctx.central.contradictions[0].strength.value();
    const double own = concentration(gland);
    double delta = 0.0;
    bool inhibited = false;
    for (const Individual* other : ctx.related) {
      double q = concentration(other->contradictions[0].strength.value());
      if (p.relay) {
        const Signal s = presented(*other, ctx.tick, p);
        if (s.origin != ctx.central.id) q = s.value;
      }
      delta += p.alpha * (own - q);
      inhibited = inhibited || q > own;
    }
    if (p.maturation_rate > 0.0) {
      const double u = ctx.rng.uniform();
      if (!inhibited) delta += p.maturation_rate * u;
    }
    if (p.soft_saturation && delta > 0.0) delta *= (1.0 - gland) / 2.0;
    up.add(kGland, delta);
  });

  rules.add_effect("bees.secrete", [p](EffectContext& ctx, Individual& next) {
    set_carried(next.body, presented(ctx.previous.individuals[ctx.slot], ctx.tick, p));
  });

  rules.add_effect("bees.relay", [p](EffectContext& ctx, Individual& next) {
    Signal best = carried(next.body);
    for (const Relevance* r : ctx.relevancies)
      for (IndividualId rid : r->related_ids) {
        const Signal s = presented(ctx.previous_of(rid), ctx.tick, p);
        if (stronger(s, best)) best = s;
      }
    set_carried(next.body, best);
  });
}

Swarm make_swarm(const Params& p, std::uint64_t seed) {
  if (p.population < 0) throw ConfigurationError("bees.population must be non-negative");
  if (!(p.alpha > 0.0 && p.alpha <= 0.5)) throw ConfigurationError("bees.alpha must lie in (0, 0.5]");
  if (p.initial_low > p.initial_high) throw ConfigurationError("bees.initial_low exceeds initial_high");
  Swarm colony;
  for (int i = 0; i < p.population; ++i) {
    const auto id = static_cast<IndividualId>(i);
    Rng rng = Rng::substream(seed, id, 0, Stream::Setup);
    colony.individuals.push_back(make_bee(id, rng.uniform(p.initial_low, p.initial_high)));
  }
  colony.relevance_builder_id = "bees.encounters";
  colony.interaction_rule_ids = {"bees.encounter"};
  return colony;
}

EmergenceSpec emergence_spec() {
  using C = Comparator;
  EmergenceSpec spec;
  spec.configs = {
      {"H21", "queen", Guard::atom(kGland, C::Gt, 0.0)},
      {"H22", "worker", Guard::atom(kGland, C::Lt, 0.0)},
  };
  spec.metrics["bees.potential_queens"] = [](const Swarm& s) -> std::optional<double> {
    return static_cast<double>(count_potential_queens(s));
  };
  VerticalPattern v21;
  v21.id = "V21";
  v21.quantifier = Quantifier::ExistsUniqueWithForAllRest;
  v21.witness = Guard::atom(kGland, C::Gt, 0.0);
  v21.rest = Guard::atom(kGland, C::Lt, 0.0);
  v21.metric_id = "bees.potential_queens";
  spec.patterns = {std::move(v21)};
  spec.required = {"V21"};
  return spec;
}

ColonyMetrics colony_metrics(const Swarm& colony) {
  ColonyMetrics m;
  m.potential_queens = count_potential_queens(colony);
  if (colony.individuals.empty()) return m;
  m.max_gland = -1.0;
  double sum = 0.0;
  for (const auto& b : colony.individuals) {
    const double z = b.contradictions[0].strength.value();
    m.max_gland = std::max(m.max_gland, z);
    sum += z;
  }
  m.mean_gland = sum / static_cast<double>(colony.individuals.size());
  return m;
}

}  // namespace contra::bees
