#include "contra/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace contra {

Aspect principal_aspect(const Contradiction& c) {
  const double z = c.strength.value();
  if (z > 0.0) return Aspect::Positive;
  if (z < 0.0) return Aspect::Negative;
  return Aspect::Undifferentiated;
}

std::string_view to_string(Comparator op) {
  switch (op) {
    case Comparator::Eq: return "=";
    case Comparator::Lt: return "<";
    case Comparator::Gt: return ">";
    case Comparator::Le: return "<=";
    case Comparator::Ge: return ">=";
    case Comparator::Ne: return "!=";
    case Comparator::Approx: return "~";
  }
  return "?";
}

bool compare(double lhs, Comparator op, double rhs, double epsilon) {
  switch (op) {
    case Comparator::Eq: return lhs == rhs;
    case Comparator::Lt: return lhs < rhs;
    case Comparator::Gt: return lhs > rhs;
    case Comparator::Le: return lhs <= rhs;
    case Comparator::Ge: return lhs >= rhs;
    case Comparator::Ne: return lhs != rhs;
    case Comparator::Approx: return std::abs(lhs - rhs) <= epsilon;
  }
  return false;
}

Guard::Guard(bool constant) : node_(Node::Constant), constant_(constant) {}

Guard Guard::atom(std::string contradiction_id, Comparator op, double constant) {
  Guard g;
  g.node_ = Node::Atom;
  g.atom_ = Atom{std::move(contradiction_id), op, constant, 0.0};
  return g;
}

Guard Guard::approx(std::string contradiction_id, double constant, double epsilon) {
  if (!(epsilon >= 0.0)) throw ConfigurationError("approximate atom needs epsilon >= 0");
  Guard g;
  g.node_ = Node::Atom;
  g.atom_ = Atom{std::move(contradiction_id), Comparator::Approx, constant, epsilon};
  return g;
}

Guard Guard::all_of(std::vector<Guard> terms) {
  Guard g;
  g.node_ = Node::And;
  g.terms_ = std::move(terms);
  return g;
}

Guard Guard::any_of(std::vector<Guard> terms) {
  Guard g;
  g.node_ = Node::Or;
  g.terms_ = std::move(terms);
  return g;
}

Guard Guard::negate(Guard term) {
  Guard g;
  g.node_ = Node::Not;
  g.terms_.push_back(std::move(term));
  return g;
}

void Guard::collect_ids(std::vector<std::string>& out) const {
  if (node_ == Node::Atom) {
    out.push_back(atom_.contradiction_id);
    return;
  }
  for (const auto& t : terms_) t.collect_ids(out);
}

std::string Guard::describe() const {
  std::ostringstream os;
  switch (node_) {
    case Node::Constant:
      os << (constant_ ? "true" : "false");
      break;
    case Node::Atom:
      os << atom_.contradiction_id << ' ' << to_string(atom_.op) << ' ' << atom_.constant;
      if (atom_.op == Comparator::Approx) os << " +/- " << atom_.epsilon;
      break;
    case Node::Not:
      os << "not (" << terms_.front().describe() << ')';
      break;
    case Node::And:
    case Node::Or: {
      const char* sep = node_ == Node::And ? " and " : " or ";
      os << '(';
      for (std::size_t i = 0; i < terms_.size(); ++i) os << (i ? sep : "") << terms_[i].describe();
      os << ')';
      break;
    }
  }
  return os.str();
}

const Appearance* Repertoire::find_appearance(std::string_view id) const {
  for (const auto& a : appearances)
    if (a.id == id) return &a;
  return nullptr;
}

const DominationRule* Repertoire::find_domination(std::string_view appearance_id) const {
  for (const auto& d : dominations)
    if (d.appearance_id == appearance_id) return &d;
  return nullptr;
}

std::optional<std::size_t> Individual::find_contradiction(std::string_view cid) const {
  for (std::size_t i = 0; i < contradictions.size(); ++i)
    if (contradictions[i].id == cid) return i;
  return std::nullopt;
}

std::size_t Individual::contradiction_index(std::string_view cid) const {
  if (auto i = find_contradiction(cid)) return *i;
  throw LookupError("individual " + std::to_string(id) + " has no contradiction " +
                    std::string(cid));
}

double Individual::strength(std::string_view cid) const {
  return contradictions[contradiction_index(cid)].strength.value();
}

const std::vector<Appearance>& Individual::appearances() const {
  static const std::vector<Appearance> none;
  return repertoire ? repertoire->appearances : none;
}

double visibility(const Individual& ind, std::string_view appearance_id) {
  const DominationRule* rule = ind.repertoire ? ind.repertoire->find_domination(appearance_id) : nullptr;
  if (rule == nullptr)
    throw LookupError("individual " + std::to_string(ind.id) + " has no appearance " +
                      std::string(appearance_id));
  if (const auto* ws = std::get_if<WeightedSum>(&rule->form)) {
    double d = 0.0;
    for (const auto& [cid, w] : ws->terms) d += ind.strength(cid) * w;
    return d;
  }
  const auto& guard = std::get<Guard>(rule->form);
  return guard.evaluate([&](const std::string& cid) { return ind.strength(cid); }) ? 1.0 : -1.0;
}

bool is_visible(const Individual& ind, std::string_view appearance_id) {
  return visibility(ind, appearance_id) > 0.0;
}

double update_strength(Individual& ind, std::string_view contradiction_id, double delta) {
  auto& s = ind.contradictions[ind.contradiction_index(contradiction_id)].strength;
  s.set(s.value() + delta);
  return s.value();
}

namespace {

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::vector<std::string> validate_individual(const Individual& ind) {
  std::vector<std::string> violations;
  for (std::size_t i = 0; i < ind.contradictions.size(); ++i) {
    const auto& c = ind.contradictions[i];
    if (c.positive_label == c.negative_label)
      violations.push_back("contradiction " + c.id + ": positive_label equals negative_label");
    for (std::size_t j = 0; j < i; ++j)
      if (ind.contradictions[j].id == c.id) violations.push_back("duplicate contradiction " + c.id);
  }
  if (!ind.repertoire) return violations;

  const auto& rep = *ind.repertoire;
  for (const auto& a : rep.appearances) {
    const auto n = std::count_if(rep.dominations.begin(), rep.dominations.end(),
                                 [&](const DominationRule& d) { return d.appearance_id == a.id; });
    if (n != 1)
      violations.push_back("appearance " + a.id + ": " + std::to_string(n) +
                           " domination rules, expected 1");
    if (a.kind == AppearanceKind::Behavior && !a.effect_id)
      violations.push_back("appearance " + a.id + ": behavior without effect_id");
  }
  for (const auto& d : rep.dominations) {
    if (rep.find_appearance(d.appearance_id) == nullptr)
      violations.push_back("domination rule for unknown appearance " + d.appearance_id);
    std::vector<std::string> ids;
    if (const auto* ws = std::get_if<WeightedSum>(&d.form)) {
      double total = 0.0;
      for (const auto& [cid, w] : ws->terms) {
        ids.push_back(cid);
        if (w < -1.0 || w > 1.0)
          violations.push_back("weight " + format_number(w) + " outside [-1, 1] for " + cid);
        total += std::abs(w);
      }
      if (std::abs(total - 1.0) > 1e-9)
        violations.push_back("weight-sum " + format_number(total) + " ≠ 1");
    } else {
      std::get<Guard>(d.form).collect_ids(ids);
    }
    for (const auto& cid : ids)
      if (!ind.find_contradiction(cid)) violations.push_back("unresolved contradiction " + cid);
  }
  return violations;
}

}  // namespace contra
