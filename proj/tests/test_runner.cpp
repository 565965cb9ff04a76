#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "contra/runner.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace contra;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("contra-test-" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> lines(const fs::path& file) {
  std::ifstream in(file);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string param(const Scenario& s, const std::string& key) {
  for (const auto& [k, v] : s.params().values())
    if (k == key) return v;
  return {};
}

}  // namespace

TEST_SUITE("runner") {
  TEST_CASE("scenario registry") {
    CHECK(scenario_names() == std::vector<std::string>{"ants", "bees", "geese", "pool"});
    CHECK_THROWS_AS((void)make_scenario("wasps"), ConfigurationError);
  }

  TEST_CASE("run-level defaults are the full-size populations") {
    RunConfig c;
    c.scenario = "bees";
    CHECK(param(*configure_scenario(c), "bees.population") == "2000");
    c.scenario = "geese";
    CHECK(param(*configure_scenario(c), "geese.herd_size") == "18");
    c.scenario = "pool";
    const auto pool = configure_scenario(c);
    CHECK(param(*pool, "pool.swimmers") == "1000");
    CHECK(param(*pool, "pool.side") == "50");
  }

  TEST_CASE("overrides apply in order and unknown keys are rejected") {
    RunConfig c;
    c.scenario = "pool";
    c.overrides = {{"pool.swimmers", "100"}, {"pool.swimmers", "120"}};
    CHECK(param(*configure_scenario(c), "pool.swimmers") == "120");
    c.overrides = {{"pool.nonsense", "1"}};
    CHECK_THROWS_AS((void)configure_scenario(c), ConfigurationError);
    c.overrides = {{"pool.swimmers", "many"}};
    try {
      (void)configure_scenario(c);
      FAIL("expected a parse error");
    } catch (const ConfigurationError& e) {
      CHECK(std::string(e.what()).find("pool.swimmers") != std::string::npos);
    }
  }

  TEST_CASE("config files fill a RunConfig and reject negative ticks") {
    const fs::path dir = scratch("config");
    fs::create_directories(dir);
    {
      std::ofstream(dir / "ok.json") << R"({"scenario":"ants","ticks":12,"seed":9,"overrides":{"ants.ants":20},"frames":true})";
      std::ofstream(dir / "neg.json") << R"({"ticks":-1})";
      std::ofstream(dir / "bad.json") << R"({"ticks":)";
    }
    const auto c = load_config_file(dir / "ok.json");
    CHECK(c.scenario == "ants");
    CHECK(c.ticks == 12u);
    CHECK(c.seed == 9u);
    CHECK(c.frames);
    REQUIRE(c.overrides.size() == 1);
    CHECK(c.overrides[0] == std::pair<std::string, std::string>{"ants.ants", "20"});
    CHECK_THROWS_WITH_AS((void)load_config_file(dir / "neg.json"), doctest::Contains("ticks"), ConfigurationError);
    CHECK_THROWS_AS((void)load_config_file(dir / "bad.json"), ConfigurationError);
    CHECK_THROWS_AS((void)load_config_file(dir / "missing.json"), ConfigurationError);
  }

  TEST_CASE("output directory resolution") {
    CHECK(resolve_output_dir("explicit") == fs::path("explicit"));
    ::setenv(kOutputDirEnv, "/tmp/from-env", 1);
    CHECK(resolve_output_dir("") == fs::path("/tmp/from-env"));
    ::unsetenv(kOutputDirEnv);
    CHECK(resolve_output_dir("") == fs::path("contra-out"));
  }

  TEST_CASE("config hash tracks parameters") {
    RunConfig c;
    c.scenario = "ants";
    const auto a = configure_scenario(c);
    c.overrides = {{"ants.evaporation_factor", "0.98"}};
    const auto b = configure_scenario(c);
    CHECK(config_hash(*a, 100) == config_hash(*a, 100));
    CHECK(config_hash(*a, 100) != config_hash(*a, 101));
    CHECK(config_hash(*a, 100) != config_hash(*b, 100));
  }

  TEST_CASE("zero ticks emits the initial metrics record only") {
    RunConfig c;
    c.scenario = "bees";
    c.ticks = 0;
    c.metrics = true;
    c.out = scratch("zero");
    std::ostringstream log;
    const auto outcome = execute(c, log);
    CHECK(outcome.ticks == 0);
    const auto rows = lines(c.out / "metrics.ndjson");
    REQUIRE(rows.size() == 2);
    CHECK(nlohmann::json::parse(rows[0]).contains("header"));
    CHECK(nlohmann::json::parse(rows[1])["tick"] == 0);
    CHECK(log.str().find("verdict: not emerged") != std::string::npos);
  }

  TEST_CASE("every emitted file starts with the header; reruns are byte-identical; replay agrees") {
    for (const std::string name : {"ants", "bees", "geese", "pool"}) {
      CAPTURE(name);
      RunConfig c;
      c.scenario = name;
      c.ticks = 30;
      c.seed = 42;
      c.frames = c.metrics = c.report = c.raster = true;
      c.stride = 10;
      if (name == "pool") c.overrides = {{"pool.swimmers", "200"}};
      if (name == "bees") c.overrides = {{"bees.population", "200"}};
      c.out = scratch(name + "-a");
      std::ostringstream log;
      const auto first = execute(c, log);
      const fs::path a = c.out;
      c.out = scratch(name + "-b");
      (void)execute(c, log);
      const fs::path b = c.out;

      const auto scenario = configure_scenario(c);
      const std::string header = header_text(*scenario, config_hash(*scenario, 30), 42, 30);
      CHECK(header.find("seed=42") != std::string::npos);
      CHECK(header.find("ticks=0..30") != std::string::npos);
      for (const auto& entry : fs::recursive_directory_iterator(a)) {
        if (!entry.is_regular_file()) continue;
        CAPTURE(entry.path().string());
        const std::string body = slurp(entry.path());
        const std::string first_line = body.substr(0, body.find('\n'));
        if (entry.path().extension() == ".csv")
          CHECK(first_line == "# " + header);
        else if (entry.path().extension() == ".ppm")
          CHECK(first_line == "P6 # " + header);
        else
          CHECK(nlohmann::json::parse(first_line)["header"]["seed"] == 42);
        CHECK(body == slurp(b / fs::relative(entry.path(), a)));
      }
      CHECK(fs::exists(a / "frames.csv"));
      CHECK(fs::exists(a / "metrics.ndjson"));
      CHECK(fs::exists(a / "report.ndjson"));
      CHECK(lines(a / "metrics.ndjson").size() == 32);

      std::ostringstream records;
      const auto replayed = replay(a, records);
      REQUIRE_FALSE(replayed.reports.empty());
      CHECK(replayed.verdict == first.report.verdict);
      CHECK(replayed.reports.back().census == first.report.census);
      CHECK(replayed.reports.back().tick == 30);
      for (const auto& [id, r] : first.report.pattern_results) {
        CHECK(replayed.reports.back().pattern_results.at(id).holds == r.holds);
        CHECK(replayed.reports.back().pattern_results.at(id).metric == r.metric);
      }
    }
  }

  TEST_CASE("rasters follow the stride and carry a P6 header") {
    RunConfig c;
    c.scenario = "ants";
    c.ticks = 25;
    c.raster = true;
    c.stride = 10;
    c.out = scratch("raster");
    std::ostringstream log;
    (void)execute(c, log);
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(c.out / "raster")) names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    CHECK(names == std::vector<std::string>{"tick_000000.ppm", "tick_000010.ppm", "tick_000020.ppm", "tick_000025.ppm"});
    const std::string ppm = slurp(c.out / "raster" / "tick_000000.ppm");
    CHECK(ppm.rfind("P6 ", 0) == 0);
    CHECK(ppm.size() == ppm.find("255\n") + 4 + 500 * 300 * 3);
  }

  TEST_CASE("unwritable output is reported as an error") {
    RunConfig c;
    c.scenario = "bees";
    c.ticks = 1;
    c.frames = true;
    const fs::path blocker = scratch("blocker");
    std::ofstream(blocker) << "not a directory";
    c.out = blocker / "sub";
    std::ostringstream log;
    CHECK_THROWS((void)execute(c, log));
  }
}
