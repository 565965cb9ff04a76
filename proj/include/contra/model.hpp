#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "contra/geometry.hpp"

namespace contra {

using IndividualId = std::uint64_t;

class LookupError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class ConfigurationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Relative strength of the two aspects of a contradiction, kept in [-1, 1].
class Strength {
 public:
  constexpr Strength() = default;
  constexpr explicit Strength(double v) : value_(clamp(v)) {}

  [[nodiscard]] constexpr double value() const { return value_; }
  constexpr void set(double v) { value_ = clamp(v); }
  constexpr operator double() const { return value_; }  // NOLINT(google-explicit-constructor)

  static constexpr double clamp(double v) { return v < -1.0 ? -1.0 : (v > 1.0 ? 1.0 : v); }

 private:
  double value_ = 0.0;
};

struct Contradiction {
  std::string id;
  std::string positive_label;
  std::string negative_label;
  Strength strength;
};

enum class Aspect { Positive, Negative, Undifferentiated };

[[nodiscard]] Aspect principal_aspect(const Contradiction& c);

enum class AppearanceKind { Property, Behavior };

struct Appearance {
  std::string id;
  AppearanceKind kind = AppearanceKind::Behavior;
  std::optional<std::string> effect_id;
  // Behaviors on different channels are selected independently within one tick
  // (a goose can quicken and steer inwards at the same time).
  int channel = 0;
};

enum class Comparator { Eq, Lt, Gt, Le, Ge, Ne, Approx };

[[nodiscard]] std::string_view to_string(Comparator op);
[[nodiscard]] bool compare(double lhs, Comparator op, double rhs, double epsilon = 0.0);

// Boolean expression over contradiction strengths. Approx atoms test |ζ - c| <= epsilon.
class Guard {
 public:
  struct Atom {
    std::string contradiction_id;
    Comparator op = Comparator::Eq;
    double constant = 0.0;
    double epsilon = 0.0;
  };

  Guard() : Guard(true) {}
  explicit Guard(bool constant);

  static Guard atom(std::string contradiction_id, Comparator op, double constant);
  static Guard approx(std::string contradiction_id, double constant, double epsilon);
  static Guard all_of(std::vector<Guard> terms);
  static Guard any_of(std::vector<Guard> terms);
  static Guard negate(Guard term);

  friend Guard operator&&(Guard a, Guard b) { return all_of({std::move(a), std::move(b)}); }
  friend Guard operator||(Guard a, Guard b) { return any_of({std::move(a), std::move(b)}); }
  friend Guard operator!(Guard a) { return negate(std::move(a)); }

  // `strength_of` maps a contradiction id to its current value; it must throw for unknown ids.
  template <class Lookup>
  [[nodiscard]] bool evaluate(const Lookup& strength_of) const {
    switch (node_) {
      case Node::Constant:
        return constant_;
      case Node::Atom:
        return compare(strength_of(atom_.contradiction_id), atom_.op, atom_.constant,
                       atom_.epsilon);
      case Node::And:
        for (const auto& t : terms_)
          if (!t.evaluate(strength_of)) return false;
        return true;
      case Node::Or:
        for (const auto& t : terms_)
          if (t.evaluate(strength_of)) return true;
        return false;
      case Node::Not:
        return !terms_.front().evaluate(strength_of);
    }
    return false;
  }

  void collect_ids(std::vector<std::string>& out) const;
  [[nodiscard]] std::string describe() const;

 private:
  enum class Node { Constant, Atom, And, Or, Not };
  Node node_ = Node::Constant;
  bool constant_ = true;
  Atom atom_;
  std::vector<Guard> terms_;
};

struct WeightedSum {
  std::vector<std::pair<std::string, double>> terms;
};

struct DominationRule {
  std::string appearance_id;
  std::variant<WeightedSum, Guard> form;
};

// Appearances and their domination rules are immutable for the lifetime of an
// individual, so copies of an individual share them.
struct Repertoire {
  std::vector<Appearance> appearances;
  std::vector<DominationRule> dominations;

  [[nodiscard]] const Appearance* find_appearance(std::string_view id) const;
  [[nodiscard]] const DominationRule* find_domination(std::string_view appearance_id) const;
};

struct Body {
  std::optional<Vec2> position;
  std::optional<double> heading;  // radians
  std::optional<double> speed;    // m/s
  // Scenario-owned per-individual state; meaning is documented by each scenario's accessors.
  std::array<double, 4> slots{};
  std::int64_t tag = 0;
};

struct Individual {
  IndividualId id = 0;
  std::vector<Contradiction> contradictions;
  std::shared_ptr<const Repertoire> repertoire;
  Body body;

  [[nodiscard]] std::optional<std::size_t> find_contradiction(std::string_view cid) const;
  [[nodiscard]] std::size_t contradiction_index(std::string_view cid) const;  // throws LookupError
  [[nodiscard]] double strength(std::string_view cid) const;                  // throws LookupError
  [[nodiscard]] const std::vector<Appearance>& appearances() const;
};

[[nodiscard]] double visibility(const Individual& ind, std::string_view appearance_id);
[[nodiscard]] bool is_visible(const Individual& ind, std::string_view appearance_id);
double update_strength(Individual& ind, std::string_view contradiction_id, double delta);
[[nodiscard]] std::vector<std::string> validate_individual(const Individual& ind);

}  // namespace contra
