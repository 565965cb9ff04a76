#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "contra/emergence.hpp"
#include "contra/engine.hpp"
#include "contra/params.hpp"

namespace contra::bees {

inline constexpr const char* kGland = "c21";

struct Params {
  int population = 200;
  double encounters_per_bee_per_tick = 4.0;
  double alpha = 0.02;
  // Initial ζ is uniform on [initial_low, initial_high]; the defaults put ~20% above zero.
  double initial_low = -0.8;
  double initial_high = 0.2;
  // Pheromone relay: bees carry the strongest pheromone they met for `relay_lifetime` ticks.
  bool relay = true;
  int relay_lifetime = 4;
  // Uninhibited bees mature by maturation_rate * U(0,1) per tick.
  double maturation_rate = 0.05;
  // Positive updates shrink by (1 - ζ)/2 so nobody sits exactly at full development.
  bool soft_saturation = true;
  // Replaces random pairing by one fixed pair per tick cycling through all pairs.
  bool cyclic_pairing = false;
};

void bind(Params& p, ParamSet& set);

// Pheromone a bee carries: value, tick it was secreted, and the secreting bee.
struct Signal {
  double value = 0.0;
  std::uint64_t birth = 0;
  IndividualId origin = 0;
};

[[nodiscard]] double concentration(double gland);
[[nodiscard]] std::pair<double, double> encounter(double gland_i, double gland_j, double alpha);

[[nodiscard]] std::shared_ptr<const Repertoire> repertoire();
[[nodiscard]] Individual make_bee(IndividualId id, double gland);

[[nodiscard]] Signal carried(const Body& body);
void set_carried(Body& body, const Signal& s);
// The signal a bee presents at `tick`: its own secretion replaces an expired or weaker one.
[[nodiscard]] Signal presented(const Individual& bee, std::uint64_t tick, const Params& p);

// Pairs drawn for one tick, as indices into the individual list.
[[nodiscard]] std::vector<std::pair<std::size_t, std::size_t>> pair_encounters(std::size_t population,
                                                                               const Params& p,
                                                                               std::uint64_t tick,
                                                                               Rng& rng);

[[nodiscard]] std::size_t count_potential_queens(const Swarm& colony);
// Removes the unique bee with ζ > 0; throws InterventionError otherwise.
void kill_queen(Swarm& colony);

void register_rules(Rulebook& rules, const Params& p);
[[nodiscard]] Swarm make_swarm(const Params& p, std::uint64_t seed);
[[nodiscard]] EmergenceSpec emergence_spec();

struct ColonyMetrics {
  std::size_t potential_queens = 0;
  double max_gland = 0.0;
  double mean_gland = 0.0;
};
[[nodiscard]] ColonyMetrics colony_metrics(const Swarm& colony);

}  // namespace contra::bees
