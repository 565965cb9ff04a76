// Serial reference kernels against the OpenMP ones, one engine tick per iteration.

#include <benchmark/benchmark.h>

#include "contra/scenario.hpp"

namespace {

void run_ticks(benchmark::State& state, const char* name, std::vector<std::pair<std::string, std::string>> overrides) {
  auto scenario = contra::make_scenario(name);
  for (const auto& [k, v] : overrides) scenario->params().set(k, v);
  contra::Rulebook rules;
  scenario->register_rules(rules);
  const auto policy = state.range(0) == 0 ? contra::ExecutionPolicy::Serial : contra::ExecutionPolicy::Parallel;
  const contra::Engine engine(rules, 1, policy);
  contra::Swarm swarm = scenario->make_swarm(1);
  std::uint64_t tick = 0;
  for (auto _ : state) benchmark::DoNotOptimize(engine.step(swarm, ++tick));
  state.SetLabel(policy == contra::ExecutionPolicy::Serial ? "serial" : "parallel");
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(swarm.individuals.size()));
}

void BM_Ants(benchmark::State& s) { run_ticks(s, "ants", {}); }
void BM_Bees(benchmark::State& s) { run_ticks(s, "bees", {{"bees.population", "2000"}}); }
void BM_Geese(benchmark::State& s) { run_ticks(s, "geese", {}); }
void BM_Pool(benchmark::State& s) { run_ticks(s, "pool", {}); }

}  // namespace

BENCHMARK(BM_Ants)->Arg(0)->Arg(1);
BENCHMARK(BM_Bees)->Arg(0)->Arg(1);
BENCHMARK(BM_Geese)->Arg(0)->Arg(1);
BENCHMARK(BM_Pool)->Arg(0)->Arg(1);

BENCHMARK_MAIN();
