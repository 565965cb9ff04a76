#include "contra/emergence.hpp"

#include "json.hpp"

namespace contra {

bool holds(const Guard& g, const Individual& ind) {
  return g.evaluate([&](const std::string& cid) { return ind.strength(cid); });
}

std::set<std::string> classify(const Individual& ind, const std::vector<HorizontalConfig>& configs) {
  std::set<std::string> labels;
  for (const auto& c : configs)
    if (holds(c.predicate, ind)) labels.insert(c.category_label);
  if (labels.empty()) labels.insert(kUnclassified);
  return labels;
}

std::map<std::string, std::size_t> census(const Swarm& swarm,
                                          const std::vector<HorizontalConfig>& configs) {
  std::map<std::string, std::size_t> counts;
  for (const auto& ind : swarm.individuals)
    for (const auto& label : classify(ind, configs)) ++counts[label];
  return counts;
}

namespace {

bool quantify(const Swarm& swarm, const VerticalPattern& p) {
  const auto& inds = swarm.individuals;
  switch (p.quantifier) {
    case Quantifier::Exists:
      for (const auto& ind : inds)
        if (holds(p.witness, ind)) return true;
      return false;
    case Quantifier::ExistsUnique: {
      std::size_t count = 0;
      for (const auto& ind : inds)
        if (holds(p.witness, ind) && ++count > 1) return false;
      return count == 1;
    }
    case Quantifier::ForAll:
      for (const auto& ind : inds)
        if (!holds(p.witness, ind)) return false;
      return true;
    case Quantifier::ExistsUniqueWithForAllRest: {
      if (!p.rest) throw ConfigurationError("pattern " + p.id + " needs a rest predicate");
      std::optional<std::size_t> witness;
      for (std::size_t i = 0; i < inds.size(); ++i) {
        if (!holds(p.witness, inds[i])) continue;
        if (witness) return false;
        witness = i;
      }
      if (!witness) return false;
      for (std::size_t i = 0; i < inds.size(); ++i)
        if (i != *witness && !holds(*p.rest, inds[i])) return false;
      return true;
    }
  }
  return false;
}

std::optional<double> metric_value(const Swarm& swarm, const MetricRegistry& metrics,
                                   const std::string& id) {
  auto it = metrics.find(id);
  if (it == metrics.end()) throw ConfigurationError("unknown metric '" + id + "'");
  return it->second(swarm);
}

}  // namespace

PatternResult evaluate_pattern(const Swarm& swarm, const VerticalPattern& pattern,
                               const MetricRegistry& metrics) {
  PatternResult result;
  result.holds = quantify(swarm, pattern);
  if (pattern.metric_id) result.metric = metric_value(swarm, metrics, *pattern.metric_id);
  for (const auto& check : pattern.checks) {
    const auto v = (pattern.metric_id && check.metric_id == *pattern.metric_id)
                       ? result.metric
                       : metric_value(swarm, metrics, check.metric_id);
    if (!v || !compare(*v, check.op, check.threshold)) result.holds = false;
  }
  return result;
}

EmergenceReport synthesize(std::map<std::string, std::size_t> census,
                           std::map<std::string, PatternResult> pattern_results,
                           const std::vector<std::string>& required) {
  EmergenceReport report;
  report.verdict = true;
  for (const auto& id : required) {
    auto it = pattern_results.find(id);
    if (it == pattern_results.end())
      throw ConfigurationError("required pattern '" + id + "' was not evaluated");
    report.verdict = report.verdict && it->second.holds;
  }
  report.census = std::move(census);
  report.pattern_results = std::move(pattern_results);
  return report;
}

EmergenceReport evaluate(const Swarm& swarm, const EmergenceSpec& spec, std::uint64_t tick) {
  std::map<std::string, PatternResult> results;
  for (const auto& p : spec.patterns) results[p.id] = evaluate_pattern(swarm, p, spec.metrics);
  auto report = synthesize(census(swarm, spec.configs), std::move(results), spec.required);
  report.tick = tick;
  return report;
}

void to_json(nlohmann::json& j, const EmergenceReport& report) {
  nlohmann::json patterns = nlohmann::json::object();
  for (const auto& [id, r] : report.pattern_results) {
    nlohmann::json entry{{"holds", r.holds}};
    entry["metric"] = r.metric ? nlohmann::json(*r.metric) : nlohmann::json(nullptr);
    patterns[id] = std::move(entry);
  }
  j = nlohmann::json{{"tick", report.tick},
                     {"census", report.census},
                     {"patterns", std::move(patterns)},
                     {"verdict", report.verdict}};
}

}  // namespace contra
