#include "contra/params.hpp"

#include <charconv>

#include "contra/model.hpp"

namespace contra {

namespace {

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty())
    throw ConfigurationError("malformed value '" + text + "' for " + key);
  return value;
}

std::string render(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

}  // namespace

void ParamSet::bind_target(std::string key, Target target) {
  entries_.emplace_back(std::move(key), target);
}

bool ParamSet::contains(const std::string& key) const {
  for (const auto& [k, t] : entries_)
    if (k == key) return true;
  return false;
}

void ParamSet::set(const std::string& key, const std::string& value) {
  for (auto& [k, target] : entries_) {
    if (k != key) continue;
    if (auto* d = std::get_if<double*>(&target)) {
      **d = parse_number<double>(key, value);
    } else if (auto* i = std::get_if<int*>(&target)) {
      **i = parse_number<int>(key, value);
    } else if (auto* u = std::get_if<std::uint64_t*>(&target)) {
      if (!value.empty() && value.front() == '-')
        throw ConfigurationError("malformed value '" + value + "' for " + key);
      **u = parse_number<std::uint64_t>(key, value);
    } else {
      bool* b = std::get<bool*>(target);
      if (value == "true" || value == "1")
        *b = true;
      else if (value == "false" || value == "0")
        *b = false;
      else
        throw ConfigurationError("malformed value '" + value + "' for " + key);
    }
    return;
  }
  throw ConfigurationError("unknown override key " + key);
}

std::vector<std::pair<std::string, std::string>> ParamSet::values() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [k, target] : entries_) {
    std::string v;
    if (auto* d = std::get_if<double*>(&target))
      v = render(**d);
    else if (auto* i = std::get_if<int*>(&target))
      v = std::to_string(**i);
    else if (auto* u = std::get_if<std::uint64_t*>(&target))
      v = std::to_string(**u);
    else
      v = *std::get<bool*>(target) ? "true" : "false";
    out.emplace_back(k, std::move(v));
  }
  return out;
}

}  // namespace contra
