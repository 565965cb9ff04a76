#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "contra/model.hpp"
#include "contra/rng.hpp"

namespace contra {

class InterventionError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An additive edit to environment cell `key`, buffered during the act phase.
struct EnvironmentEdit {
  std::size_t key = 0;
  double amount = 0.0;
};

class Environment {
 public:
  virtual ~Environment() = default;
  [[nodiscard]] virtual std::unique_ptr<Environment> clone() const = 0;
  virtual void apply_edit(const EnvironmentEdit& edit);
  [[nodiscard]] virtual std::vector<double> digest() const { return {}; }
};

// Placeholder for scenarios whose environment carries no mutable state.
class EmptyEnvironment final : public Environment {
 public:
  [[nodiscard]] std::unique_ptr<Environment> clone() const override {
    return std::make_unique<EmptyEnvironment>();
  }
};

struct Swarm {
  std::vector<Individual> individuals;
  std::string relevance_builder_id;
  std::vector<std::string> interaction_rule_ids;
  std::vector<std::string> dynamics_ids;
  std::unique_ptr<Environment> environment = std::make_unique<EmptyEnvironment>();

  Swarm() = default;
  Swarm(const Swarm& other);
  Swarm& operator=(const Swarm& other);
  Swarm(Swarm&&) noexcept = default;
  Swarm& operator=(Swarm&&) noexcept = default;

  [[nodiscard]] const Individual* find(IndividualId id) const;
  [[nodiscard]] Individual* find(IndividualId id);

  template <class E>
  [[nodiscard]] E& environment_as() {
    auto* e = dynamic_cast<E*>(environment.get());
    if (e == nullptr) throw ConfigurationError("swarm environment has unexpected type");
    return *e;
  }
  template <class E>
  [[nodiscard]] const E& environment_as() const {
    const auto* e = dynamic_cast<const E*>(environment.get());
    if (e == nullptr) throw ConfigurationError("swarm environment has unexpected type");
    return *e;
  }
};

// Throws ConfigurationError on duplicate ids or invalid individuals.
void validate_swarm(const Swarm& swarm);

struct Relevance {
  IndividualId central_id = 0;
  std::vector<IndividualId> related_ids;
  std::vector<std::string> factor_ids;
};

enum class ExecutionPolicy { Serial, Parallel };

struct BuildContext {
  const Swarm& swarm;
  std::uint64_t tick;
  std::uint64_t seed;
  ExecutionPolicy policy;

  [[nodiscard]] Rng swarm_rng() const {
    return Rng::substream(seed, kSwarmStreamId, tick, Stream::Relevance);
  }
};

// Accumulates the updates one central individual receives during the sense phase.
// An assignment replaces the previous value; additions are summed on top of it.
class StrengthUpdates {
 public:
  explicit StrengthUpdates(const Individual& central);

  void add(std::string_view contradiction_id, double delta);
  void assign(std::string_view contradiction_id, double value);

  void apply_to(Individual& ind) const;
  // Net change per contradiction index, before clamping.
  [[nodiscard]] std::vector<double> deltas() const;
  [[nodiscard]] bool empty() const;

 private:
  struct Entry {
    bool assigned = false;
    double value = 0.0;
    double delta = 0.0;
  };
  std::size_t resolve(std::string_view contradiction_id) const;

  const Individual& central_;
  std::vector<Entry> entries_;
};

struct InteractionContext {
  const Swarm& swarm;
  const Individual& central;
  const Relevance& relevance;
  std::span<const Individual* const> related;  // resolved related_ids, same order
  std::uint64_t tick;
  Rng& rng;
};

using RelevanceBuilder = std::function<std::vector<Relevance>(const BuildContext&)>;
using InteractionRule = std::function<void(const InteractionContext&, StrengthUpdates&)>;

struct EffectContext {
  const Swarm& previous;                     // state at the start of the tick
  const std::vector<Individual>& sensed;     // state after the sense phase
  std::size_t slot;                          // index of the acting individual
  std::span<const Relevance* const> relevancies;
  const Appearance& behavior;
  std::uint64_t tick;
  Rng& rng;
  std::vector<EnvironmentEdit>& edits;
  const std::unordered_map<IndividualId, std::size_t>& slots;

  [[nodiscard]] const Individual& self() const { return sensed[slot]; }
  // Start-of-tick state of another individual; throws LookupError for unknown ids.
  [[nodiscard]] const Individual& previous_of(IndividualId id) const;
};

using EffectHandler = std::function<void(EffectContext&, Individual& next)>;

struct DynamicsContext {
  std::uint64_t tick;
  std::uint64_t seed;
  // Behaviors executed this tick, indexed by slot; joined with '+' when several channels acted.
  std::span<const std::string> behaviors;

  [[nodiscard]] Rng rng() const {
    return Rng::substream(seed, kSwarmStreamId, tick, Stream::Dynamics);
  }
};

using Dynamics = std::function<void(Swarm&, const DynamicsContext&)>;

// Registry of scenario hooks keyed by identifier.
class Rulebook {
 public:
  void add_relevance_builder(std::string id, RelevanceBuilder fn);
  void add_interaction(std::string id, InteractionRule fn);
  void add_effect(std::string id, EffectHandler fn);
  void add_dynamics(std::string id, Dynamics fn);

  [[nodiscard]] const RelevanceBuilder& relevance_builder(const std::string& id) const;
  [[nodiscard]] const InteractionRule& interaction(const std::string& id) const;
  [[nodiscard]] const EffectHandler& effect(const std::string& id) const;
  [[nodiscard]] const Dynamics& dynamics(const std::string& id) const;

 private:
  std::map<std::string, RelevanceBuilder, std::less<>> builders_;
  std::map<std::string, InteractionRule, std::less<>> interactions_;
  std::map<std::string, EffectHandler, std::less<>> effects_;
  std::map<std::string, Dynamics, std::less<>> dynamics_;
};

struct IndividualRecord {
  IndividualId id = 0;
  std::vector<double> strengths;
  Body body;
  std::string behavior;  // empty when idle
};

struct TickSnapshot {
  std::uint64_t tick = 0;
  std::vector<IndividualRecord> individuals;
  std::vector<double> environment;
  std::uint64_t rng_state = 0;  // (seed, tick) fingerprint; draws are counter-based

  friend bool operator==(const TickSnapshot&, const TickSnapshot&);
};

[[nodiscard]] TickSnapshot make_snapshot(const Swarm& swarm, std::uint64_t tick, std::uint64_t seed,
                                         std::span<const std::string> behaviors = {});

// Chooses one strictly visible behavior, with probability proportional to visibility.
[[nodiscard]] const Appearance* select_behavior(const Individual& ind, Rng& rng,
                                                std::optional<int> channel = std::nullopt);

class ObserverError : public std::runtime_error {
 public:
  ObserverError(std::uint64_t tick, const std::string& what);
  [[nodiscard]] std::uint64_t tick() const { return tick_; }

 private:
  std::uint64_t tick_;
};

using Observer = std::function<void(const TickSnapshot&)>;

class Engine {
 public:
  Engine(const Rulebook& rules, std::uint64_t seed,
         ExecutionPolicy policy = ExecutionPolicy::Parallel);

  [[nodiscard]] std::vector<Relevance> build_relevancies(const Swarm& swarm,
                                                         std::uint64_t tick) const;
  // Sense phase: returns the post-interaction copy of every individual.
  [[nodiscard]] std::vector<Individual> apply_interactions(
      const Swarm& swarm, std::span<const Relevance> relevancies, std::uint64_t tick) const;

  // Advances the swarm in place by one tick and returns the snapshot taken after dynamics.
  TickSnapshot step(Swarm& swarm, std::uint64_t tick) const;

  // Applies `ticks` steps after emitting the tick-0 snapshot. Observers see every snapshot;
  // the trace is only retained when `keep_trace` is set.
  std::vector<TickSnapshot> run(Swarm& swarm, std::uint64_t ticks,
                                std::span<const Observer> observers = {},
                                bool keep_trace = true) const;

  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] ExecutionPolicy policy() const { return policy_; }

 private:
  const Rulebook& rules_;
  std::uint64_t seed_;
  ExecutionPolicy policy_;
};

}  // namespace contra
