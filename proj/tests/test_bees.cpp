#include <algorithm>
#include <cmath>

#include "contra/bees.hpp"
#include "doctest.h"

using namespace contra;
using namespace contra::bees;

namespace {

Params literal(int population, double alpha) {
  Params p;
  p.population = population;
  p.alpha = alpha;
  p.relay = false;
  p.maturation_rate = 0.0;
  p.soft_saturation = false;
  p.cyclic_pairing = true;
  return p;
}

Swarm colony(std::vector<double> glands) {
  Swarm s;
  for (std::size_t i = 0; i < glands.size(); ++i) s.individuals.push_back(make_bee(i, glands[i]));
  s.relevance_builder_id = "bees.encounters";
  s.interaction_rule_ids = {"bees.encounter"};
  return s;
}

std::vector<double> glands(const Swarm& s) {
  std::vector<double> z;
  for (const auto& b : s.individuals) z.push_back(b.strength(kGland));
  return z;
}

}  // namespace

TEST_SUITE("bees") {
  TEST_CASE("concentration is affine") {
    CHECK(concentration(-1.0) == 0.0);
    CHECK(concentration(1.0) == 1.0);
    CHECK(concentration(0.5) == 0.75);
  }

  TEST_CASE("encounter") {
    CHECK(encounter(0.3, 0.3, 0.05) == std::pair{0.0, 0.0});
    const auto [di, dj] = encounter(0.5, -0.5, 0.05);
    CHECK(di == doctest::Approx(0.025));
    CHECK(dj == doctest::Approx(-0.025));
    const auto [ei, ej] = encounter(0.0, -1.0, 0.1);
    CHECK(ei == doctest::Approx(0.05));
    CHECK(ej == doctest::Approx(-0.05));
  }

  TEST_CASE("property: encounters conserve the pair total") {
    Rng rng(3);
    for (int i = 0; i < 5000; ++i) {
      const double a = rng.uniform(-1.0, 1.0), b = rng.uniform(-1.0, 1.0), alpha = rng.uniform(0.0, 0.5);
      const auto [di, dj] = encounter(a, b, alpha);
      CHECK(di == -dj);
    }
  }

  TEST_CASE("pair_encounters") {
    Params p;
    Rng rng(1);
    CHECK(pair_encounters(0, p, 1, rng).empty());
    CHECK(pair_encounters(1, p, 1, rng).empty());
    p.encounters_per_bee_per_tick = 1.0;
    for (int t = 1; t <= 100; ++t) {
      const auto pairs = pair_encounters(2, p, t, rng);
      REQUIRE(pairs.size() == 1);
      CHECK(pairs[0].first != pairs[0].second);
    }
    p.encounters_per_bee_per_tick = 4.0;
    const auto many = pair_encounters(2000, p, 1, rng);
    CHECK(many.size() == 4000);
    for (const auto& [i, j] : many) CHECK((i != j && i < 2000 && j < 2000));
  }

  TEST_CASE("cyclic pairing visits every pair once per cycle") {
    Params p = literal(4, 0.1);
    Rng rng(1);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (int t = 1; t <= 6; ++t) {
      const auto pairs = pair_encounters(4, p, t, rng);
      REQUIRE(pairs.size() == 1);
      seen.insert(pairs[0]);
    }
    CHECK(seen.size() == 6);
  }

  TEST_CASE("count and kill queen") {
    CHECK(count_potential_queens(colony({-0.1, -0.2})) == 0);
    Swarm c = colony({0.8, -0.3, -0.6});
    CHECK(count_potential_queens(c) == 1);
    kill_queen(c);
    CHECK(glands(c) == std::vector<double>{-0.3, -0.6});
    CHECK_THROWS_AS(kill_queen(c), InterventionError);
    Swarm two = colony({0.2, 0.3});
    CHECK_THROWS_AS(kill_queen(two), InterventionError);
  }

  TEST_CASE("initial colony has about 20 percent potential queens") {
    Params p;
    p.population = 2000;
    const auto n = count_potential_queens(make_swarm(p, 1));
    CHECK(n > 340);
    CHECK(n < 460);
  }

  TEST_CASE("configuration errors") {
    Params p;
    p.alpha = 0.6;
    CHECK_THROWS_AS((void)make_swarm(p, 1), ConfigurationError);
    p.alpha = 0.1;
    p.population = -1;
    CHECK_THROWS_AS((void)make_swarm(p, 1), ConfigurationError);
  }

  TEST_CASE("equal bees meeting leave both unchanged") {
    const Params p = literal(2, 0.1);
    Rulebook rules;
    register_rules(rules, p);
    Swarm c = colony({0.1, 0.1});
    (void)Engine(rules, 1).step(c, 1);
    CHECK(glands(c) == std::vector<double>{0.1, 0.1});
  }

  TEST_CASE("property: the strict maximum keeps its rank under one literal encounter") {
    // Exhaustive over a lattice of 3- and 4-bee colonies with one pair per tick.
    const std::vector<double> levels{-1.0, -0.6, -0.2, 0.0, 0.3, 0.7, 1.0};
    for (int n : {3, 4}) {
      const Params p = literal(n, 0.2);
      Rulebook rules;
      register_rules(rules, p);
      std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
      while (true) {
        std::vector<double> z;
        for (auto k : idx) z.push_back(levels[k]);
        const auto top = std::max_element(z.begin(), z.end());
        if (std::count(z.begin(), z.end(), *top) == 1) {
          const auto who = static_cast<std::size_t>(top - z.begin());
          for (int t = 1; t <= n * (n - 1) / 2; ++t) {
            Swarm c = colony(z);
            (void)Engine(rules, 1).step(c, t);
            const auto after = glands(c);
            for (std::size_t k = 0; k < after.size(); ++k)
              if (k != who) CHECK(after[who] >= after[k]);
          }
        }
        std::size_t d = 0;
        while (d < idx.size() && ++idx[d] == levels.size()) idx[d++] = 0;
        if (d == idx.size()) break;
      }
    }
  }

  TEST_CASE("small colony requeens after the queen is removed") {
    Params p;
    p.population = 5;
    Rulebook rules;
    register_rules(rules, p);
    Swarm c = make_swarm(p, 4);
    const Engine engine(rules, 4);
    std::uint64_t t = 1;
    for (; t <= 5000 && count_potential_queens(c) != 1; ++t) (void)engine.step(c, t);
    REQUIRE(count_potential_queens(c) == 1);
    kill_queen(c);
    CHECK(c.individuals.size() == 4);
    bool requeened = false;
    for (std::uint64_t k = 0; k < 5000 && !requeened; ++k, ++t) {
      (void)engine.step(c, t);
      requeened = count_potential_queens(c) == 1;
    }
    CHECK(requeened);
  }

  TEST_CASE("serial and parallel runs are bit-identical") {
    Params p;
    Rulebook rules;
    register_rules(rules, p);
    Swarm a = make_swarm(p, 8), b = make_swarm(p, 8);
    CHECK(Engine(rules, 8, ExecutionPolicy::Serial).run(a, 300) ==
          Engine(rules, 8, ExecutionPolicy::Parallel).run(b, 300));
  }
}
