#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "contra/engine.hpp"
#include "doctest.h"

using namespace contra;

namespace {

// Toy swarm on a ring: each individual senses its successor and pulls its own ζ halfway
// towards it; positive individuals step right, negative ones step left.
std::shared_ptr<const Repertoire> toy_repertoire() {
  auto rep = std::make_shared<Repertoire>();
  rep->appearances = {{"right", AppearanceKind::Behavior, "step_right"},
                      {"left", AppearanceKind::Behavior, "step_left"}};
  rep->dominations = {{"right", Guard::atom("c1", Comparator::Gt, 0.0)},
                      {"left", Guard::atom("c1", Comparator::Lt, 0.0)}};
  return rep;
}

Individual toy(IndividualId id, double z) {
  Individual ind;
  ind.id = id;
  ind.contradictions = {{"c1", "right", "left", Strength(z)}};
  ind.repertoire = toy_repertoire();
  ind.body.position = Vec2{0.0, 0.0};
  return ind;
}

Rulebook toy_rules() {
  Rulebook rules;
  rules.add_relevance_builder("ring", [](const BuildContext& ctx) {
    std::vector<Relevance> out;
    const auto& inds = ctx.swarm.individuals;
    for (std::size_t i = 0; i < inds.size(); ++i) {
      Relevance r{inds[i].id, {}, {}};
      if (inds.size() > 1) r.related_ids.push_back(inds[(i + 1) % inds.size()].id);
      out.push_back(r);
    }
    return out;
  });
  rules.add_interaction("pull", [](const InteractionContext& ctx, StrengthUpdates& up) {
    for (const Individual* other : ctx.related)
      up.add("c1", 0.5 * (other->strength("c1") - ctx.central.strength("c1")) + 0.1 * (ctx.rng.uniform() - 0.5));
  });
  rules.add_effect("step_right", [](EffectContext& ctx, Individual& next) {
    next.body.position->x += 1.0 + ctx.rng.uniform();
  });
  rules.add_effect("step_left", [](EffectContext&, Individual& next) { next.body.position->x -= 1.0; });
  rules.add_dynamics("count", [](Swarm& swarm, const DynamicsContext&) {
    for (auto& ind : swarm.individuals) ind.body.tag += 1;
  });
  return rules;
}

Swarm toy_swarm(std::size_t n) {
  Swarm s;
  Rng rng(7);
  for (std::size_t i = 0; i < n; ++i) s.individuals.push_back(toy(i + 10, rng.uniform(-1.0, 1.0)));
  s.relevance_builder_id = "ring";
  s.interaction_rule_ids = {"pull"};
  s.dynamics_ids = {"count"};
  return s;
}

}  // namespace

TEST_SUITE("engine") {
  TEST_CASE("strength updates: assignment replaces, additions accumulate, writes clamp") {
    Individual ind = toy(1, 0.2);
    StrengthUpdates up(ind);
    CHECK(up.empty());
    up.add("c1", 0.3);
    up.assign("c1", -0.5);
    up.add("c1", 0.1);
    up.add("c1", 0.1);
    CHECK_FALSE(up.empty());
    up.apply_to(ind);
    CHECK(ind.strength("c1") == doctest::Approx(-0.3));
    StrengthUpdates big(ind);
    big.add("c1", 5.0);
    big.apply_to(ind);
    CHECK(ind.strength("c1") == 1.0);
    CHECK_THROWS_AS(big.add("c99", 1.0), ConfigurationError);
  }

  TEST_CASE("build_relevancies: single individual is central with no related ids") {
    const Rulebook rules = toy_rules();
    Swarm s = toy_swarm(1);
    const auto rel = Engine(rules, 1).build_relevancies(s, 1);
    REQUIRE(rel.size() == 1);
    CHECK(rel[0].related_ids.empty());
  }

  TEST_CASE("build_relevancies: unknown builder and missing centrals are configuration errors") {
    const Rulebook rules = toy_rules();
    Swarm s = toy_swarm(3);
    s.relevance_builder_id = "nope";
    CHECK_THROWS_AS((void)Engine(rules, 1).build_relevancies(s, 1), ConfigurationError);

    Rulebook partial = toy_rules();
    partial.add_relevance_builder("first_only", [](const BuildContext& ctx) {
      return std::vector<Relevance>{{ctx.swarm.individuals[0].id, {}, {}}};
    });
    s.relevance_builder_id = "first_only";
    CHECK_THROWS_AS((void)Engine(partial, 1).build_relevancies(s, 1), ConfigurationError);
  }

  TEST_CASE("apply_interactions: no relevancies, no change; only centrals are written") {
    const Rulebook rules = toy_rules();
    Swarm s = toy_swarm(5);
    const Engine engine(rules, 3);
    const auto none = engine.apply_interactions(s, {}, 1);
    for (std::size_t i = 0; i < s.individuals.size(); ++i)
      CHECK(none[i].strength("c1") == s.individuals[i].strength("c1"));

    const std::vector<Relevance> only_first{{s.individuals[0].id, {s.individuals[1].id}, {}}};
    const auto sensed = engine.apply_interactions(s, only_first, 1);
    for (std::size_t i = 1; i < s.individuals.size(); ++i)
      CHECK(sensed[i].strength("c1") == s.individuals[i].strength("c1"));
  }

  TEST_CASE("apply_interactions reads only the previous state") {
    // Reversing the individual order must not change anyone's sensed value.
    const Rulebook rules = toy_rules();
    Swarm s = toy_swarm(12);
    Swarm reversed = s;
    std::reverse(reversed.individuals.begin(), reversed.individuals.end());
    const Engine engine(rules, 9);
    const std::vector<Relevance> rel = engine.build_relevancies(s, 4);
    const auto a = engine.apply_interactions(s, rel, 4);
    const auto b = engine.apply_interactions(reversed, rel, 4);
    for (const auto& x : a) {
      const auto it = std::find_if(b.begin(), b.end(), [&](const Individual& y) { return y.id == x.id; });
      REQUIRE(it != b.end());
      CHECK(it->strength("c1") == x.strength("c1"));
    }
  }

  TEST_CASE("select_behavior: none, single, proportional") {
    Rng rng(1);
    Individual zero = toy(1, 0.0);
    CHECK(select_behavior(zero, rng) == nullptr);
    Individual pos = toy(1, 0.4);
    for (int i = 0; i < 50; ++i) CHECK(select_behavior(pos, rng)->id == "right");

    // Two weighted behaviors with visibility 0.6 and 0.2: expected 0.75 / 0.25.
    auto rep = std::make_shared<Repertoire>();
    rep->appearances = {{"a", AppearanceKind::Behavior, "e"}, {"b", AppearanceKind::Behavior, "e"}};
    rep->dominations = {{"a", WeightedSum{{{"c1", 0.6}, {"c2", 0.4}}}},
                        {"b", WeightedSum{{{"c1", 0.2}, {"c2", -0.8}}}}};
    Individual two;
    two.contradictions = {{"c1", "o", "p", Strength(1.0)}, {"c2", "o", "p", Strength(0.0)}};
    two.repertoire = rep;
    REQUIRE(visibility(two, "a") == doctest::Approx(0.6));
    REQUIRE(visibility(two, "b") == doctest::Approx(0.2));
    int a = 0;
    const int trials = 200000;
    for (int i = 0; i < trials; ++i) a += select_behavior(two, rng)->id == "a";
    CHECK(static_cast<double>(a) / trials == doctest::Approx(0.75).epsilon(0.01));
  }

  TEST_CASE("run: trace length and tick numbering") {
    const Rulebook rules = toy_rules();
    Swarm empty;
    empty.relevance_builder_id = "ring";
    const auto trace = Engine(rules, 1).run(empty, 5);
    REQUIRE(trace.size() == 6);
    for (std::size_t i = 0; i < trace.size(); ++i) CHECK(trace[i].tick == i);

    Swarm s = toy_swarm(3);
    CHECK(Engine(rules, 1).run(s, 0).size() == 1);
  }

  TEST_CASE("run: observers see every tick and failures carry the tick") {
    const Rulebook rules = toy_rules();
    Swarm s = toy_swarm(4);
    std::vector<std::uint64_t> seen;
    const Observer obs[] = {[&](const TickSnapshot& snap) {
      seen.push_back(snap.tick);
      if (snap.tick == 3) throw std::runtime_error("disk full");
    }};
    try {
      (void)Engine(rules, 1).run(s, 10, obs, false);
      FAIL("expected ObserverError");
    } catch (const ObserverError& e) {
      CHECK(e.tick() == 3);
    }
    CHECK(seen == std::vector<std::uint64_t>{0, 1, 2, 3});
  }

  TEST_CASE("determinism: identical seeds agree, and serial equals parallel bit for bit") {
    const Rulebook rules = toy_rules();
    Swarm a = toy_swarm(64), b = toy_swarm(64), c = toy_swarm(64);
    const auto ta = Engine(rules, 42, ExecutionPolicy::Parallel).run(a, 40);
    const auto tb = Engine(rules, 42, ExecutionPolicy::Parallel).run(b, 40);
    const auto tc = Engine(rules, 42, ExecutionPolicy::Serial).run(c, 40);
    CHECK(ta == tb);
    CHECK(ta == tc);
    Swarm d = toy_swarm(64);
    CHECK_FALSE(Engine(rules, 43).run(d, 40) == ta);
  }

  TEST_CASE("step: effects act on the post-sense state and dynamics run last") {
    const Rulebook rules = toy_rules();
    Swarm s;
    s.individuals = {toy(1, 1.0), toy(2, 1.0)};
    s.relevance_builder_id = "ring";
    s.interaction_rule_ids = {"pull"};
    s.dynamics_ids = {"count"};
    const auto snap = Engine(rules, 1).step(s, 1);
    for (const auto& r : snap.individuals) {
      CHECK(r.body.position->x >= 1.0);
      CHECK(r.behavior == "right");
      CHECK(r.body.tag == 1);
    }
  }

  TEST_CASE("rng substreams depend only on (seed, id, tick, purpose)") {
    auto draw = [](std::uint64_t seed, std::uint64_t id, std::uint64_t tick, Stream s) {
      Rng r = Rng::substream(seed, id, tick, s);
      return r();
    };
    CHECK(draw(1, 2, 3, Stream::Effect) == draw(1, 2, 3, Stream::Effect));
    CHECK(draw(1, 2, 3, Stream::Effect) != draw(1, 2, 4, Stream::Effect));
    CHECK(draw(1, 2, 3, Stream::Effect) != draw(1, 3, 3, Stream::Effect));
    CHECK(draw(1, 2, 3, Stream::Effect) != draw(1, 2, 3, Stream::Selection));
    Rng r(3);
    for (int i = 0; i < 10000; ++i) {
      const double u = r.uniform();
      CHECK((u >= 0.0 && u < 1.0));
      CHECK(r.below(7) < 7);
    }
  }
}
