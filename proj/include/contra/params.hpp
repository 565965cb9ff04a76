#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace contra {

// Binds dotted override keys ("ants.evaporation_factor") to fields of a parameter struct.
class ParamSet {
 public:
  using Target = std::variant<double*, int*, std::uint64_t*, bool*>;

  void bind(std::string key, double& field) { bind_target(std::move(key), &field); }
  void bind(std::string key, int& field) { bind_target(std::move(key), &field); }
  void bind(std::string key, std::uint64_t& field) { bind_target(std::move(key), &field); }
  void bind(std::string key, bool& field) { bind_target(std::move(key), &field); }

  [[nodiscard]] bool contains(const std::string& key) const;
  // Parses `value` into the bound field; unknown keys and malformed values throw
  // ConfigurationError naming the key.
  void set(const std::string& key, const std::string& value);
  // Current values in binding order, rendered canonically.
  [[nodiscard]] std::vector<std::pair<std::string, std::string>> values() const;

 private:
  void bind_target(std::string key, Target target);
  std::vector<std::pair<std::string, Target>> entries_;
};

}  // namespace contra
