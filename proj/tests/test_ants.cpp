#include <cmath>
#include <deque>

#include "contra/ants.hpp"
#include "doctest.h"

using namespace contra;
using namespace contra::ants;

namespace {

Params small_world() {
  Params p;
  p.width = 20;
  p.height = 10;
  p.nest_x0 = 0, p.nest_y0 = 4, p.nest_x1 = 1, p.nest_y1 = 5;
  p.food_x0 = 18, p.food_y0 = 4, p.food_x1 = 19, p.food_y1 = 5;
  return p;
}

Individual ant_at(Cell c, double idleness, Vec2 home) {
  Individual a = make_ant(1, c);
  a.contradictions[a.contradiction_index(kIdleness)].strength.set(idleness);
  set_home_vector(a.body, home);
  return a;
}

}  // namespace

TEST_SUITE("ants") {
  TEST_CASE("sense_place precedence and canonical values") {
    AntWorld w(small_world());
    CHECK(sense_place({0, 4}, w) == kAtNest);
    CHECK(sense_place({19, 5}, w) == kAtFood);
    CHECK(sense_place({10, 2}, w) == kOrdinary);
    w.set_pheromone({10, 2}, 1.0);
    CHECK(sense_place({10, 2}, w) == kOnPheromone);
    w.set_pheromone({0, 4}, 1.0);
    CHECK(sense_place({0, 4}, w) == kAtNest);
    CHECK_THROWS_AS((void)sense_place({20, 0}, w), BoundsError);
    CHECK_THROWS_AS((void)sense_place({-1, 0}, w), BoundsError);
  }

  TEST_CASE("ant_behavior table") {
    CHECK(ant_behavior(1, kOrdinary) == Behavior::RandomMove);
    CHECK(ant_behavior(1, kOnPheromone) == Behavior::FollowTrail);
    CHECK(ant_behavior(-1, kAtFood) == Behavior::Homeward);
    CHECK(ant_behavior(-1, kOnPheromone) == Behavior::Homeward);
    CHECK(ant_behavior(-1, kOrdinary) == Behavior::Homeward);
    CHECK(ant_behavior(1, kAtFood) == Behavior::Load);
    CHECK(ant_behavior(-1, kAtNest) == Behavior::Unload);
    CHECK(std::string(appearance_id(Behavior::RandomMove)) == "a11");
    CHECK(std::string(appearance_id(Behavior::Unload)) == "a15");
  }

  TEST_CASE("repertoire guards agree with ant_behavior") {
    for (double idle : {1.0, -1.0})
      for (double spec : {kAtNest, kAtFood, kOnPheromone, kOrdinary}) {
        Individual a = make_ant(1, {5, 5});
        a.contradictions[a.contradiction_index(kIdleness)].strength.set(idle);
        a.contradictions[a.contradiction_index(kSpecialness)].strength.set(spec);
        std::vector<std::string> visible;
        for (const auto& ap : a.appearances())
          if (is_visible(a, ap.id)) visible.push_back(ap.id);
        const Behavior b = ant_behavior(idle, spec);
        if (b == Behavior::None) {
          CHECK(visible.empty());
        } else {
          REQUIRE(visible.size() == 1);
          CHECK(visible[0] == appearance_id(b));
        }
        CHECK(validate_individual(a).empty());
      }
  }

  TEST_CASE("load, unload and deposit") {
    AntWorld w(small_world());
    Rng rng(1);
    std::vector<EnvironmentEdit> edits;
    Individual a = ant_at({18, 4}, 1, {17, 0});
    apply_ant_behavior(a, Behavior::Load, w, rng, edits);
    CHECK(a.strength(kIdleness) == -1.0);
    apply_ant_behavior(a, Behavior::Unload, w, rng, edits);
    CHECK(a.strength(kIdleness) == 1.0);
    CHECK(edits.empty());

    Individual b = ant_at({10, 4}, -1, {9, 0});
    apply_ant_behavior(b, Behavior::Homeward, w, rng, edits);
    REQUIRE(edits.size() == 1);
    CHECK(edits[0].key == w.index({10, 4}));
    CHECK(edits[0].amount == w.params().deposit_amount);
    CHECK(cell_of(b.body) == Cell{9, 4});
    CHECK(home_vector(b.body).x == 8.0);
    w.apply_edit(edits[0]);
    CHECK(w.pheromone({10, 4}) == 1.0);
  }

  TEST_CASE("random moves stay on the grid and update the home vector") {
    AntWorld w(small_world());
    Rng rng(2);
    std::vector<EnvironmentEdit> edits;
    Individual a = ant_at({0, 0}, 1, {0, -4});
    for (int i = 0; i < 500; ++i) {
      const Cell before = cell_of(a.body);
      const Vec2 h = home_vector(a.body);
      apply_ant_behavior(a, Behavior::RandomMove, w, rng, edits);
      const Cell after = cell_of(a.body);
      CHECK(w.contains(after));
      if (w.in_nest(after)) {
        CHECK(home_vector(a.body) == Vec2{});
        continue;
      }
      CHECK(std::abs(after.x - before.x) <= 1);
      CHECK(std::abs(after.y - before.y) <= 1);
      CHECK(home_vector(a.body).x == h.x + (after.x - before.x));
      CHECK(home_vector(a.body).y == h.y + (after.y - before.y));
    }
  }

  TEST_CASE("trail following climbs pheromone away from the nest") {
    AntWorld w(small_world());
    Rng rng(3);
    std::vector<EnvironmentEdit> edits;
    w.set_pheromone({6, 5}, 0.5);
    w.set_pheromone({6, 4}, 0.9);
    w.set_pheromone({4, 4}, 5.0);  // higher but towards the nest
    Individual a = ant_at({5, 4}, 1, {4, 0});
    apply_ant_behavior(a, Behavior::FollowTrail, w, rng, edits);
    CHECK(cell_of(a.body) == Cell{6, 4});
  }

  TEST_CASE("evaporate") {
    AntWorld w(small_world());
    w.set_pheromone({3, 3}, 10.0);
    w.set_pheromone({4, 4}, 5e-5);
    evaporate(w);
    CHECK(w.pheromone({3, 3}) == doctest::Approx(9.9));
    CHECK(w.pheromone({0, 0}) == 0.0);
    for (int i = 0; i < 400; ++i) evaporate(w);
    CHECK(w.pheromone({4, 4}) == 0.0);
  }

  TEST_CASE("detect_trail on constructed grids") {
    AntWorld w(small_world());
    CHECK_FALSE(detect_trail(w).connected);
    CHECK_FALSE(detect_trail(w).length.has_value());
    for (int x = 1; x <= 18; ++x) w.set_pheromone({x, 4}, 1.0);
    auto t = detect_trail(w);
    CHECK(t.connected);
    REQUIRE(t.length);
    CHECK(*t.length == 17);
    w.set_pheromone({9, 4}, 0.01);
    t = detect_trail(w);
    CHECK_FALSE(t.connected);
    CHECK_FALSE(t.length.has_value());
  }

  TEST_CASE("property: ζ12 is canonical, ζ11 flips only by load or unload, loaded ants close in") {
    Params p;
    p.ants = 60;
    Rulebook rules;
    register_rules(rules);
    Swarm s = make_swarm(p, 5);
    const Engine engine(rules, 5);
    auto prev = make_snapshot(s, 0, 5);
    for (std::uint64_t t = 1; t <= 800; ++t) {
      const double total_before = s.environment_as<AntWorld>().total_pheromone();
      const auto snap = engine.step(s, t);
      bool any_deposit = false;
      for (std::size_t i = 0; i < snap.individuals.size(); ++i) {
        const auto& now = snap.individuals[i];
        const auto& was = prev.individuals[i];
        const double z12 = now.strengths[1];
        CHECK((z12 == kAtNest || z12 == kAtFood || z12 == kOnPheromone || z12 == kOrdinary));
        if (now.strengths[0] != was.strengths[0]) CHECK((now.behavior == "a14" || now.behavior == "a15"));
        if (now.behavior == "a13") {
          any_deposit = true;
          CHECK(norm(home_vector(now.body)) <= norm(home_vector(was.body)));
        }
      }
      if (!any_deposit) CHECK(s.environment_as<AntWorld>().total_pheromone() <= total_before);
      prev = snap;
    }
  }

  TEST_CASE("serial and parallel runs are bit-identical") {
    Params p;
    Rulebook rules;
    register_rules(rules);
    Swarm a = make_swarm(p, 8), b = make_swarm(p, 8);
    const auto ta = Engine(rules, 8, ExecutionPolicy::Serial).run(a, 300);
    const auto tb = Engine(rules, 8, ExecutionPolicy::Parallel).run(b, 300);
    CHECK(ta == tb);
  }
}
