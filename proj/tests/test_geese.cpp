#include <cmath>

#include "contra/geese.hpp"
#include "doctest.h"

using namespace contra;
using namespace contra::geese;

namespace {

void set(Individual& g, const char* cid, double v) { g.contradictions[g.contradiction_index(cid)].strength.set(v); }

Swarm v_formation(const Params& p) {
  Swarm herd;
  herd.individuals.push_back(make_goose(0, {0.0, 0.0}, 0.0, true, p));
  for (int k = 1; k <= 4; ++k) {
    const double side = k % 2 ? 1.0 : -1.0;
    herd.individuals.push_back(make_goose(static_cast<IndividualId>(k), {-0.5 * k, side * 0.4 * k}, 0.0, false, p));
  }
  return herd;
}

}  // namespace

TEST_SUITE("geese") {
  TEST_CASE("update_following") {
    const Params p;
    CHECK(update_following(p.d_safe, p) == 0.0);
    CHECK(update_following(p.d_safe + p.d_scale, p) == doctest::Approx(1.0));
    CHECK(update_following(0.3, p) < 0.0);
    CHECK(update_following(100.0, p) == 1.0);
  }

  TEST_CASE("update_protection") {
    const Params p;
    CHECK(update_protection(p.theta_comfort, p) == 0.0);
    CHECK(update_protection(128.0, p) == 1.0);
    CHECK(update_protection(0.0, p) == doctest::Approx(Strength::clamp(-p.theta_comfort / p.theta_scale)));
    CHECK(update_protection(170.0, p) == 1.0);
  }

  TEST_CASE("property: following and protection are monotone") {
    const Params p;
    double prev_f = -2.0, prev_q = -2.0;
    for (int i = 0; i <= 2000; ++i) {
      const double f = update_following(i * 0.002, p);
      const double q = update_protection(i * 0.09, p);
      CHECK(f >= prev_f);
      CHECK(q >= prev_q);
      prev_f = f;
      prev_q = q;
    }
  }

  TEST_CASE("update_spirit drains the leader and restores followers") {
    Params p;
    p.drain_rate = 0.001;
    double s = 1.0;
    for (int i = 0; i < 1000; ++i) s = update_spirit(s, true, p);
    CHECK(s == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(update_spirit(s, true, p) < 0.0);
    double f = -0.5;
    for (int i = 0; i < 100; ++i) {
      const double next = update_spirit(f, false, p);
      CHECK(next > f);
      f = next;
    }
    CHECK(update_spirit(1.0, false, p) == 1.0);
  }

  TEST_CASE("goose_behavior table") {
    const Params p;
    CHECK(goose_behavior(1, 0.5, 0, 0, p).longitudinal == "a31");
    CHECK(goose_behavior(-1, 0.5, 0.4, 0, p).longitudinal == "a32");
    CHECK(goose_behavior(1, -0.3, 0, 0, p).longitudinal == "a33");
    CHECK(goose_behavior(-1, 0.5, -0.2, 0, p).longitudinal == "a33");
    const auto in = goose_behavior(-1, 0.5, 0, 0.5, p);
    CHECK_FALSE(in.longitudinal.has_value());
    CHECK(in.lateral == "a34");
    CHECK(goose_behavior(-1, 0.5, 0, -0.5, p).lateral == "a35");
    const auto both = goose_behavior(-1, 0.5, 0.3, -0.5, p);
    CHECK(both.longitudinal == "a32");
    CHECK(both.lateral == "a35");
    const auto steady = goose_behavior(-1, 0.5, 0, 0, p);
    CHECK_FALSE(steady.longitudinal.has_value());
    CHECK_FALSE(steady.lateral.has_value());
  }

  TEST_CASE("lateral guard can read the spirit contradiction") {
    Params p;
    p.lateral_guard_on_spirit = true;
    CHECK(goose_behavior(-1, 0.5, 0, 0, p).lateral == "a34");
  }

  TEST_CASE("preceding goose and vision angle") {
    const Params p;
    Swarm herd = v_formation(p);
    CHECK(preceding_of(herd, herd.individuals[0]) == nullptr);
    CHECK(preceding_of(herd, herd.individuals[3])->id == 1);
    Body b;
    b.position = Vec2{0, 0};
    b.heading = 0.0;
    CHECK(vision_angle(b, {1, 1}) == doctest::Approx(45.0));
    CHECK(vision_angle(b, {-1, 0}) == doctest::Approx(180.0));
  }

  TEST_CASE("leader_handoff") {
    const Params p;
    Swarm herd = v_formation(p);
    herd.individuals[0].body.position = Vec2{-10.0, 0.0};
    herd.individuals[3].body.position = Vec2{5.0, 1.0};
    leader_handoff(herd);
    CHECK_FALSE(is_leader(herd.individuals[0]));
    CHECK(is_leader(herd.individuals[3]));
    CHECK(leader_of(herd)->id == 3);

    Swarm tie = v_formation(p);
    tie.individuals[2].body.position = Vec2{3.0, 1.0};
    tie.individuals[4].body.position = Vec2{3.0, -1.0};
    leader_handoff(tie);
    CHECK(leader_of(tie)->id == 2);

    Swarm one;
    one.individuals.push_back(make_goose(0, {}, 0.0, true, p));
    leader_handoff(one);
    CHECK(is_leader(one.individuals[0]));
  }

  TEST_CASE("detect_formation") {
    const Params p;
    Swarm herd = v_formation(p);
    CHECK(detect_formation(herd, 0.1).formed);
    Swarm two = herd;
    set(two.individuals[1], kLeading, 1.0);
    CHECK_FALSE(detect_formation(two, 0.1).formed);
    CHECK(detect_formation(two, 0.1).metrics.leaders == 2);
    Swarm loose = herd;
    set(loose.individuals[2], kSpacing, 0.5);
    CHECK_FALSE(detect_formation(loose, 0.1).formed);
    Swarm tired = herd;
    set(tired.individuals[0], kSpirit, -0.1);
    CHECK_FALSE(detect_formation(tired, 0.1).formed);
  }

  TEST_CASE("property: one leader every tick, leadership moves only by handoff, formed spacing in band") {
    Params p;
    p.drain_rate = 2e-3;  // several handoffs within the run
    Rulebook rules;
    register_rules(rules, p);
    Swarm herd = make_swarm(p, 3);
    const Engine engine(rules, 3);
    Swarm prev = herd;
    int handoffs = 0, formed_ticks = 0;
    for (std::uint64_t t = 1; t <= 4000; ++t) {
      const auto snap = engine.step(herd, t);
      std::size_t leaders = 0;
      bool leader_slowed = false;
      for (std::size_t i = 0; i < herd.individuals.size(); ++i) {
        leaders += is_leader(herd.individuals[i]);
        if (is_leader(prev.individuals[i]) && snap.individuals[i].behavior.find("a33") != std::string::npos)
          leader_slowed = true;
      }
      CHECK(leaders == 1);
      const bool changed = leader_of(prev)->id != leader_of(herd)->id;
      if (changed) {
        ++handoffs;
        CHECK(leader_slowed);
      }
      if (detect_formation(herd, p.formation_epsilon).formed) {
        ++formed_ticks;
        for (const auto& g : prev.individuals) {
          if (is_leader(g)) continue;
          const Individual* ahead = preceding_of(prev, g);
          REQUIRE(ahead != nullptr);
          const double d = distance(*g.body.position, *ahead->body.position);
          CHECK(d >= p.d_safe - p.formation_epsilon * p.d_scale - 1e-9);
          CHECK(d <= p.d_safe + p.formation_epsilon * p.d_scale + 1e-9);
        }
      }
      prev = herd;
    }
    CHECK(handoffs >= 1);
    CHECK(formed_ticks > 0);
  }

  TEST_CASE("serial and parallel runs are bit-identical") {
    const Params p;
    Rulebook rules;
    register_rules(rules, p);
    Swarm a = make_swarm(p, 8), b = make_swarm(p, 8);
    CHECK(Engine(rules, 8, ExecutionPolicy::Serial).run(a, 1000) ==
          Engine(rules, 8, ExecutionPolicy::Parallel).run(b, 1000));
  }
}
