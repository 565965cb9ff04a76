#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "contra/engine.hpp"
#include "contra/model.hpp"

namespace contra {

inline constexpr const char* kUnclassified = "unclassified";

struct HorizontalConfig {
  std::string id;
  std::string category_label;
  Guard predicate;
};

enum class Quantifier { Exists, ExistsUnique, ForAll, ExistsUniqueWithForAllRest };

// A scalar swarm metric; nullopt means "not defined for this state" (e.g. no trail).
using Metric = std::function<std::optional<double>(const Swarm&)>;
using MetricRegistry = std::map<std::string, Metric, std::less<>>;

struct MetricCheck {
  std::string metric_id;
  Comparator op = Comparator::Ge;
  double threshold = 0.0;
};

struct VerticalPattern {
  std::string id;
  Quantifier quantifier = Quantifier::Exists;
  Guard witness;
  std::optional<Guard> rest;  // required for ExistsUniqueWithForAllRest
  std::optional<std::string> metric_id;
  std::vector<MetricCheck> checks;  // all must hold on top of the quantifier
};

struct PatternResult {
  bool holds = false;
  std::optional<double> metric;
};

struct EmergenceReport {
  std::uint64_t tick = 0;
  std::map<std::string, std::size_t> census;
  std::map<std::string, PatternResult> pattern_results;
  bool verdict = true;
};

struct EmergenceSpec {
  std::vector<HorizontalConfig> configs;
  std::vector<VerticalPattern> patterns;
  std::vector<std::string> required;
  MetricRegistry metrics;
};

[[nodiscard]] bool holds(const Guard& g, const Individual& ind);

[[nodiscard]] std::set<std::string> classify(const Individual& ind,
                                             const std::vector<HorizontalConfig>& configs);
[[nodiscard]] std::map<std::string, std::size_t> census(
    const Swarm& swarm, const std::vector<HorizontalConfig>& configs);
[[nodiscard]] PatternResult evaluate_pattern(const Swarm& swarm, const VerticalPattern& pattern,
                                             const MetricRegistry& metrics = {});
[[nodiscard]] EmergenceReport synthesize(std::map<std::string, std::size_t> census,
                                         std::map<std::string, PatternResult> pattern_results,
                                         const std::vector<std::string>& required);

// Runs census, every pattern, and synthesis for one state.
[[nodiscard]] EmergenceReport evaluate(const Swarm& swarm, const EmergenceSpec& spec,
                                       std::uint64_t tick);

void to_json(nlohmann::json& j, const EmergenceReport& report);

}  // namespace contra
