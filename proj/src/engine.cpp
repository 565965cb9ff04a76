#include "contra/engine.hpp"

#include <algorithm>
#include <exception>
#include <set>

namespace contra {

void Environment::apply_edit(const EnvironmentEdit& edit) {
  throw ConfigurationError("environment does not accept edits (key " + std::to_string(edit.key) +
                           ")");
}

Swarm::Swarm(const Swarm& other)
    : individuals(other.individuals),
      relevance_builder_id(other.relevance_builder_id),
      interaction_rule_ids(other.interaction_rule_ids),
      dynamics_ids(other.dynamics_ids),
      environment(other.environment ? other.environment->clone() : nullptr) {}

Swarm& Swarm::operator=(const Swarm& other) {
  if (this != &other) {
    Swarm copy(other);
    *this = std::move(copy);
  }
  return *this;
}

const Individual* Swarm::find(IndividualId id) const {
  for (const auto& ind : individuals)
    if (ind.id == id) return &ind;
  return nullptr;
}

Individual* Swarm::find(IndividualId id) {
  for (auto& ind : individuals)
    if (ind.id == id) return &ind;
  return nullptr;
}

void validate_swarm(const Swarm& swarm) {
  std::set<IndividualId> seen;
  for (const auto& ind : swarm.individuals) {
    if (!seen.insert(ind.id).second)
      throw ConfigurationError("duplicate individual id " + std::to_string(ind.id));
    auto violations = validate_individual(ind);
    if (!violations.empty())
      throw ConfigurationError("individual " + std::to_string(ind.id) + ": " + violations.front());
  }
}

StrengthUpdates::StrengthUpdates(const Individual& central)
    : central_(central), entries_(central.contradictions.size()) {}

std::size_t StrengthUpdates::resolve(std::string_view contradiction_id) const {
  if (auto i = central_.find_contradiction(contradiction_id)) return *i;
  throw ConfigurationError("interaction references unknown contradiction " +
                           std::string(contradiction_id) + " on individual " +
                           std::to_string(central_.id));
}

void StrengthUpdates::add(std::string_view contradiction_id, double delta) {
  entries_[resolve(contradiction_id)].delta += delta;
}

void StrengthUpdates::assign(std::string_view contradiction_id, double value) {
  auto& e = entries_[resolve(contradiction_id)];
  e.assigned = true;
  e.value = value;
  e.delta = 0.0;
}

void StrengthUpdates::apply_to(Individual& ind) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    auto& s = ind.contradictions[i].strength;
    if (e.assigned) s.set(e.value);
    if (e.delta != 0.0) s.set(s.value() + e.delta);
  }
}

std::vector<double> StrengthUpdates::deltas() const {
  std::vector<double> out(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    const double base = central_.contradictions[i].strength.value();
    out[i] = (e.assigned ? e.value - base : 0.0) + e.delta;
  }
  return out;
}

bool StrengthUpdates::empty() const {
  return std::none_of(entries_.begin(), entries_.end(),
                      [](const Entry& e) { return e.assigned || e.delta != 0.0; });
}

namespace {

template <class Map>
const auto& lookup(const Map& map, const std::string& id, const char* kind) {
  auto it = map.find(id);
  if (it == map.end()) throw ConfigurationError(std::string("unknown ") + kind + " '" + id + "'");
  return it->second;
}

template <class Fn>
void for_each_slot(std::size_t n, ExecutionPolicy policy, Fn&& fn) {
  if (policy == ExecutionPolicy::Serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  // Exceptions cannot cross the parallel region; keep the one from the lowest slot.
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::unordered_map<IndividualId, std::size_t> slot_index(const Swarm& swarm) {
  std::unordered_map<IndividualId, std::size_t> slots;
  slots.reserve(swarm.individuals.size());
  for (std::size_t i = 0; i < swarm.individuals.size(); ++i) slots.emplace(swarm.individuals[i].id, i);
  return slots;
}

std::vector<std::vector<const Relevance*>> group_by_central(
    const std::unordered_map<IndividualId, std::size_t>& slots, std::size_t n,
    std::span<const Relevance> relevancies) {
  std::vector<std::vector<const Relevance*>> grouped(n);
  for (const auto& r : relevancies) {
    auto it = slots.find(r.central_id);
    if (it == slots.end())
      throw ConfigurationError("relevance names unknown central individual " +
                               std::to_string(r.central_id));
    grouped[it->second].push_back(&r);
  }
  return grouped;
}

}  // namespace

void Rulebook::add_relevance_builder(std::string id, RelevanceBuilder fn) {
  builders_[std::move(id)] = std::move(fn);
}
void Rulebook::add_interaction(std::string id, InteractionRule fn) {
  interactions_[std::move(id)] = std::move(fn);
}
void Rulebook::add_effect(std::string id, EffectHandler fn) { effects_[std::move(id)] = std::move(fn); }
void Rulebook::add_dynamics(std::string id, Dynamics fn) { dynamics_[std::move(id)] = std::move(fn); }

const RelevanceBuilder& Rulebook::relevance_builder(const std::string& id) const {
  return lookup(builders_, id, "relevance builder");
}
const InteractionRule& Rulebook::interaction(const std::string& id) const {
  return lookup(interactions_, id, "interaction rule");
}
const EffectHandler& Rulebook::effect(const std::string& id) const {
  return lookup(effects_, id, "effect handler");
}
const Dynamics& Rulebook::dynamics(const std::string& id) const {
  return lookup(dynamics_, id, "environment dynamics");
}

bool operator==(const TickSnapshot& a, const TickSnapshot& b) {
  if (a.tick != b.tick || a.rng_state != b.rng_state || a.environment != b.environment ||
      a.individuals.size() != b.individuals.size())
    return false;
  for (std::size_t i = 0; i < a.individuals.size(); ++i) {
    const auto& x = a.individuals[i];
    const auto& y = b.individuals[i];
    if (x.id != y.id || x.strengths != y.strengths || x.behavior != y.behavior ||
        x.body.position != y.body.position || x.body.heading != y.body.heading ||
        x.body.speed != y.body.speed || x.body.slots != y.body.slots || x.body.tag != y.body.tag)
      return false;
  }
  return true;
}

TickSnapshot make_snapshot(const Swarm& swarm, std::uint64_t tick, std::uint64_t seed,
                           std::span<const std::string> behaviors) {
  TickSnapshot snap;
  snap.tick = tick;
  snap.rng_state = mix64(seed ^ mix64(tick));
  snap.environment = swarm.environment ? swarm.environment->digest() : std::vector<double>{};
  snap.individuals.reserve(swarm.individuals.size());
  for (std::size_t i = 0; i < swarm.individuals.size(); ++i) {
    const auto& ind = swarm.individuals[i];
    IndividualRecord rec;
    rec.id = ind.id;
    rec.strengths.reserve(ind.contradictions.size());
    for (const auto& c : ind.contradictions) rec.strengths.push_back(c.strength.value());
    rec.body = ind.body;
    if (i < behaviors.size()) rec.behavior = behaviors[i];
    snap.individuals.push_back(std::move(rec));
  }
  return snap;
}

const Appearance* select_behavior(const Individual& ind, Rng& rng, std::optional<int> channel) {
  std::vector<std::pair<const Appearance*, double>> visible;
  for (const auto& a : ind.appearances()) {
    if (a.kind != AppearanceKind::Behavior) continue;
    if (channel && a.channel != *channel) continue;
    const double d = visibility(ind, a.id);
    if (d > 0.0) visible.emplace_back(&a, d);
  }
  if (visible.empty()) return nullptr;
  if (visible.size() == 1) return visible.front().first;
  double total = 0.0;
  for (const auto& [a, d] : visible) total += d;
  double u = rng.uniform() * total;
  for (const auto& [a, d] : visible) {
    if (u < d) return a;
    u -= d;
  }
  return visible.back().first;
}

const Individual& EffectContext::previous_of(IndividualId id) const {
  auto it = slots.find(id);
  if (it == slots.end()) throw LookupError("no individual " + std::to_string(id));
  return previous.individuals[it->second];
}

ObserverError::ObserverError(std::uint64_t tick, const std::string& what)
    : std::runtime_error("observer failed at tick " + std::to_string(tick) + ": " + what),
      tick_(tick) {}

Engine::Engine(const Rulebook& rules, std::uint64_t seed, ExecutionPolicy policy)
    : rules_(rules), seed_(seed), policy_(policy) {}

std::vector<Relevance> Engine::build_relevancies(const Swarm& swarm, std::uint64_t tick) const {
  const auto& builder = rules_.relevance_builder(swarm.relevance_builder_id);
  auto relevancies = builder(BuildContext{swarm, tick, seed_, policy_});

  const auto slots = slot_index(swarm);
  std::vector<char> central(swarm.individuals.size(), 0);
  for (const auto& r : relevancies) {
    auto it = slots.find(r.central_id);
    if (it == slots.end())
      throw ConfigurationError("relevance names unknown central individual " +
                               std::to_string(r.central_id));
    if (std::find(r.related_ids.begin(), r.related_ids.end(), r.central_id) != r.related_ids.end())
      throw ConfigurationError("individual " + std::to_string(r.central_id) +
                               " is related to itself");
    central[it->second] = 1;
  }
  for (std::size_t i = 0; i < central.size(); ++i)
    if (!central[i])
      throw ConfigurationError("individual " + std::to_string(swarm.individuals[i].id) +
                               " is not central in any relevance");
  return relevancies;
}

std::vector<Individual> Engine::apply_interactions(const Swarm& swarm,
                                                   std::span<const Relevance> relevancies,
                                                   std::uint64_t tick) const {
  std::vector<const InteractionRule*> rules;
  for (const auto& id : swarm.interaction_rule_ids) rules.push_back(&rules_.interaction(id));

  const std::size_t n = swarm.individuals.size();
  const auto slots = slot_index(swarm);
  const auto grouped = group_by_central(slots, n, relevancies);

  std::vector<Individual> sensed = swarm.individuals;
  for_each_slot(n, policy_, [&](std::size_t slot) {
    const Individual& central = swarm.individuals[slot];
    Rng rng = Rng::substream(seed_, central.id, tick, Stream::Interaction);
    StrengthUpdates updates(central);
    std::vector<const Individual*> related;
    for (const Relevance* r : grouped[slot]) {
      related.clear();
      for (IndividualId rid : r->related_ids) {
        auto it = slots.find(rid);
        if (it == slots.end())
          throw ConfigurationError("relevance names unknown related individual " +
                                   std::to_string(rid));
        related.push_back(&swarm.individuals[it->second]);
      }
      const InteractionContext ctx{swarm, central, *r, related, tick, rng};
      for (const auto* rule : rules) (*rule)(ctx, updates);
    }
    updates.apply_to(sensed[slot]);
  });
  return sensed;
}

TickSnapshot Engine::step(Swarm& swarm, std::uint64_t tick) const {
  const std::size_t n = swarm.individuals.size();

  // (1) relevance and (2) sense.
  const auto relevancies = build_relevancies(swarm, tick);
  const auto sensed = apply_interactions(swarm, relevancies, tick);
  const auto slots = slot_index(swarm);
  const auto grouped = group_by_central(slots, n, relevancies);

  // (3) select and (4) act, each individual writing only its own next state and edit buffer.
  std::vector<Individual> next = sensed;
  std::vector<std::vector<EnvironmentEdit>> edits(n);
  std::vector<std::string> behaviors(n);
  for_each_slot(n, policy_, [&](std::size_t slot) {
    const Individual& self = sensed[slot];
    Rng select_rng = Rng::substream(seed_, self.id, tick, Stream::Selection);
    Rng effect_rng = Rng::substream(seed_, self.id, tick, Stream::Effect);

    std::vector<int> channels;
    for (const auto& a : self.appearances())
      if (a.kind == AppearanceKind::Behavior &&
          std::find(channels.begin(), channels.end(), a.channel) == channels.end())
        channels.push_back(a.channel);
    std::sort(channels.begin(), channels.end());

    for (int channel : channels) {
      const Appearance* chosen = select_behavior(self, select_rng, channel);
      if (chosen == nullptr) continue;
      if (!behaviors[slot].empty()) behaviors[slot] += '+';
      behaviors[slot] += chosen->id;
      if (!chosen->effect_id) continue;
      EffectContext ctx{swarm, sensed,     slot,        grouped[slot], *chosen,
                        tick,  effect_rng, edits[slot], slots};
      rules_.effect(*chosen->effect_id)(ctx, next[slot]);
    }
  });

  swarm.individuals = std::move(next);

  // Merge buffered edits in key order; ties keep individual order.
  std::vector<EnvironmentEdit> merged;
  for (auto& e : edits) merged.insert(merged.end(), e.begin(), e.end());
  std::stable_sort(merged.begin(), merged.end(),
                   [](const EnvironmentEdit& a, const EnvironmentEdit& b) { return a.key < b.key; });
  for (const auto& e : merged) swarm.environment->apply_edit(e);

  // (5) environment dynamics and swarm-level post-phase.
  const DynamicsContext dctx{tick, seed_, behaviors};
  for (const auto& id : swarm.dynamics_ids) rules_.dynamics(id)(swarm, dctx);

  return make_snapshot(swarm, tick, seed_, behaviors);
}

std::vector<TickSnapshot> Engine::run(Swarm& swarm, std::uint64_t ticks,
                                      std::span<const Observer> observers, bool keep_trace) const {
  std::vector<TickSnapshot> trace;
  auto emit = [&](TickSnapshot snap) {
    for (const auto& obs : observers) {
      try {
        obs(snap);
      } catch (const std::exception& e) {
        throw ObserverError(snap.tick, e.what());
      }
    }
    if (keep_trace) trace.push_back(std::move(snap));
  };
  emit(make_snapshot(swarm, 0, seed_));
  for (std::uint64_t t = 1; t <= ticks; ++t) emit(step(swarm, t));
  return trace;
}

}  // namespace contra
