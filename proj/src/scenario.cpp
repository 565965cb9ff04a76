#include "contra/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "contra/ants.hpp"
#include "contra/bees.hpp"
#include "contra/geese.hpp"
#include "contra/pool.hpp"

namespace contra {

using Color = std::array<std::uint8_t, 3>;

Raster::Raster(int w, int h, Color fill) : width(w), height(h) {
  rgb.resize(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
  for (std::size_t i = 0; i < rgb.size(); i += 3) std::copy(fill.begin(), fill.end(), rgb.begin() + static_cast<std::ptrdiff_t>(i));
}

void Raster::fill_rect(int x0, int y0, int x1, int y1, Color color) {
  x0 = std::max(x0, 0), y0 = std::max(y0, 0);
  x1 = std::min(x1, width), y1 = std::min(y1, height);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) {
      const auto i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3;
      std::copy(color.begin(), color.end(), rgb.begin() + static_cast<std::ptrdiff_t>(i));
    }
}

void append_number(std::string& out, double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, r.ptr);
}

void append_number(std::string& out, std::uint64_t v) {
  char buf[24];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, r.ptr);
}

void append_number(std::string& out, std::int64_t v) {
  char buf[24];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, r.ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (r.ec != std::errc{} || r.ptr != text.data() + text.size())
    throw ConfigurationError("malformed number '" + std::string(text) + "'");
  return v;
}

std::uint64_t parse_uint(std::string_view text) {
  std::uint64_t v = 0;
  auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (r.ec != std::errc{} || r.ptr != text.data() + text.size())
    throw ConfigurationError("malformed integer '" + std::string(text) + "'");
  return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void Scenario::append_environment(std::string&, const TickSnapshot&) const {}

void Scenario::restore_environment(Swarm&, std::span<const std::array<double, 3>>) const {}

std::optional<Raster> Scenario::render(const TickSnapshot&) const { return std::nullopt; }

namespace {

void field(std::string& out, double v) {
  out += ',';
  append_number(out, v);
}

void field(std::string& out, std::string_view s) {
  out += ',';
  out += s;
}

void expect_fields(std::span<const std::string_view> f, std::size_t n) {
  if (f.size() != n)
    throw ConfigurationError("frame row has " + std::to_string(f.size()) + " fields, expected " + std::to_string(n));
}

void set_strengths(Individual& ind, std::span<const std::string_view> values) {
  for (std::size_t i = 0; i < values.size(); ++i) ind.contradictions[i].strength.set(parse_double(values[i]));
}

class AntsScenario final : public Scenario {
 public:
  AntsScenario() { ants::bind(p_, params_); }
  std::string_view name() const override { return "ants"; }
  std::uint64_t default_ticks() const override { return 5000; }
  void register_rules(Rulebook& rules) const override { ants::register_rules(rules); }
  Swarm make_swarm(std::uint64_t seed) const override { return ants::make_swarm(p_, seed); }
  EmergenceSpec emergence_spec() const override { return ants::emergence_spec(); }

  std::string frame_columns() const override { return "id,x,y,zeta11,zeta12,home_x,home_y,behavior"; }
  void append_frame_row(std::string& out, const IndividualRecord& r) const override {
    const auto c = ants::cell_of(r.body);
    const auto h = ants::home_vector(r.body);
    append_number(out, r.id);
    field(out, static_cast<double>(c.x));
    field(out, static_cast<double>(c.y));
    field(out, r.strengths[0]);
    field(out, r.strengths[1]);
    field(out, h.x);
    field(out, h.y);
    field(out, r.behavior);
  }
  Individual parse_frame_row(std::span<const std::string_view> f) const override {
    expect_fields(f, 8);
    Individual ant = ants::make_ant(parse_uint(f[0]), {static_cast<int>(parse_double(f[1])),
                                                       static_cast<int>(parse_double(f[2]))});
    set_strengths(ant, f.subspan(3, 2));
    ants::set_home_vector(ant.body, {parse_double(f[5]), parse_double(f[6])});
    return ant;
  }

  bool has_environment() const override { return true; }
  void append_environment(std::string& out, const TickSnapshot& s) const override {
    for (std::size_t i = 0; i < s.environment.size(); ++i) {
      if (s.environment[i] == 0.0) continue;
      append_number(out, s.tick);
      field(out, static_cast<double>(static_cast<int>(i) % p_.width));
      field(out, static_cast<double>(static_cast<int>(i) / p_.width));
      field(out, s.environment[i]);
      out += '\n';
    }
  }
  void restore_environment(Swarm& swarm, std::span<const std::array<double, 3>> cells) const override {
    auto& world = swarm.environment_as<ants::AntWorld>();
    for (int y = 0; y < world.height(); ++y)
      for (int x = 0; x < world.width(); ++x) world.set_pheromone({x, y}, 0.0);
    for (const auto& c : cells)
      world.set_pheromone({static_cast<int>(c[0]), static_cast<int>(c[1])}, c[2]);
  }

  std::optional<Raster> render(const TickSnapshot& s) const override {
    constexpr int k = 5;
    Raster img(p_.width * k, p_.height * k, {255, 255, 255});
    const ants::AntWorld world(p_);
    for (int y = 0; y < p_.height; ++y)
      for (int x = 0; x < p_.width; ++x) {
        const int row = p_.height - 1 - y;
        const auto i = static_cast<std::size_t>(y) * static_cast<std::size_t>(p_.width) + static_cast<std::size_t>(x);
        Color c{255, 255, 255};
        if (world.in_nest({x, y})) {
          c = {139, 90, 43};
        } else if (world.in_food({x, y})) {
          c = {210, 30, 30};
        } else if (i < s.environment.size() && s.environment[i] >= p_.presence_threshold) {
          const double t = std::clamp(s.environment[i] / (4.0 * p_.deposit_amount), 0.0, 1.0);
          const auto g = static_cast<std::uint8_t>(220.0 - 160.0 * t);
          c = {g, g, g};
        }
        img.fill_rect(x * k, row * k, (x + 1) * k, (row + 1) * k, c);
      }
    for (const auto& r : s.individuals) {
      const auto c = ants::cell_of(r.body);
      const int row = p_.height - 1 - c.y;
      img.fill_rect(c.x * k + 1, row * k + 1, c.x * k + k - 1, row * k + k - 1, {0, 0, 0});
    }
    return img;
  }

 private:
  ants::Params p_;
};

class BeesScenario final : public Scenario {
 public:
  BeesScenario() { bees::bind(p_, params_); }
  std::string_view name() const override { return "bees"; }
  std::uint64_t default_ticks() const override { return 5000; }
  void register_rules(Rulebook& rules) const override { bees::register_rules(rules, p_); }
  Swarm make_swarm(std::uint64_t seed) const override { return bees::make_swarm(p_, seed); }
  EmergenceSpec emergence_spec() const override { return bees::emergence_spec(); }

  std::string frame_columns() const override { return "id,zeta21,signal,signal_birth,signal_origin,behavior"; }
  void append_frame_row(std::string& out, const IndividualRecord& r) const override {
    const auto s = bees::carried(r.body);
    append_number(out, r.id);
    field(out, r.strengths[0]);
    field(out, s.value);
    out += ',';
    append_number(out, s.birth);
    out += ',';
    append_number(out, s.origin);
    field(out, r.behavior);
  }
  Individual parse_frame_row(std::span<const std::string_view> f) const override {
    expect_fields(f, 6);
    Individual bee = bees::make_bee(parse_uint(f[0]), parse_double(f[1]));
    bees::set_carried(bee.body, {parse_double(f[2]), parse_uint(f[3]), parse_uint(f[4])});
    return bee;
  }

 private:
  bees::Params p_;
};

class GeeseScenario final : public Scenario {
 public:
  GeeseScenario() { geese::bind(p_, params_); }
  std::string_view name() const override { return "geese"; }
  std::uint64_t default_ticks() const override { return 20000; }
  void register_rules(Rulebook& rules) const override { geese::register_rules(rules, p_); }
  Swarm make_swarm(std::uint64_t seed) const override { return geese::make_swarm(p_, seed); }
  EmergenceSpec emergence_spec() const override { return geese::emergence_spec(p_); }

  std::string frame_columns() const override {
    return "id,x,y,heading,speed,zeta31,zeta32,zeta33,zeta34,behavior";
  }
  void append_frame_row(std::string& out, const IndividualRecord& r) const override {
    const Vec2 pos = r.body.position.value_or(Vec2{});
    append_number(out, r.id);
    field(out, pos.x);
    field(out, pos.y);
    field(out, r.body.heading.value_or(0.0));
    field(out, r.body.speed.value_or(0.0));
    for (double z : r.strengths) field(out, z);
    field(out, r.behavior);
  }
  Individual parse_frame_row(std::span<const std::string_view> f) const override {
    expect_fields(f, 10);
    Individual g = geese::make_goose(parse_uint(f[0]), {parse_double(f[1]), parse_double(f[2])},
                                     parse_double(f[3]), false, p_);
    g.body.speed = parse_double(f[4]);
    set_strengths(g, f.subspan(5, 4));
    return g;
  }

  // Formation view: the herd around its centroid, 20 px per metre, leader in red.
  std::optional<Raster> render(const TickSnapshot& s) const override {
    constexpr int size = 480;
    constexpr double scale = 20.0;
    Raster img(size, size, {235, 242, 250});
    if (s.individuals.empty()) return img;
    Vec2 c{};
    for (const auto& r : s.individuals) c += r.body.position.value_or(Vec2{});
    c = c * (1.0 / static_cast<double>(s.individuals.size()));
    for (const auto& r : s.individuals) {
      const Vec2 rel = rotate(r.body.position.value_or(Vec2{}) - c, -p_.migration_heading);
      const int px = size / 2 + static_cast<int>(std::lround(rel.x * scale));
      const int py = size / 2 - static_cast<int>(std::lround(rel.y * scale));
      const bool leader = !r.strengths.empty() && r.strengths[0] == 1.0;
      img.fill_rect(px - 3, py - 3, px + 4, py + 4, leader ? Color{200, 20, 20} : Color{40, 40, 40});
    }
    return img;
  }

 private:
  geese::Params p_;
};

class PoolScenario final : public Scenario {
 public:
  PoolScenario() { pool::bind(p_, params_); }
  std::string_view name() const override { return "pool"; }
  std::uint64_t default_ticks() const override { return 3600; }
  void register_rules(Rulebook& rules) const override { pool::register_rules(rules, p_); }
  Swarm make_swarm(std::uint64_t seed) const override { return pool::make_swarm(p_, seed); }
  EmergenceSpec emergence_spec() const override { return pool::emergence_spec(p_); }

  std::string frame_columns() const override {
    return "id,type,x,y,heading,zeta41,zeta42,speed,course,behavior";
  }
  void append_frame_row(std::string& out, const IndividualRecord& r) const override {
    const Vec2 pos = r.body.position.value_or(Vec2{});
    append_number(out, r.id);
    field(out, r.body.tag == static_cast<std::int64_t>(pool::SwimmerType::Veteran) ? "veteran" : "learner");
    field(out, pos.x);
    field(out, pos.y);
    field(out, r.body.heading.value_or(0.0));
    field(out, r.strengths[0]);
    field(out, r.strengths[1]);
    field(out, r.body.speed.value_or(0.0));
    field(out, r.body.slots[0]);
    field(out, r.behavior);
  }
  Individual parse_frame_row(std::span<const std::string_view> f) const override {
    expect_fields(f, 10);
    const auto type = f[1] == "veteran" ? pool::SwimmerType::Veteran : pool::SwimmerType::Learner;
    Individual s = pool::make_swimmer(parse_uint(f[0]), type, {parse_double(f[2]), parse_double(f[3])},
                                      parse_double(f[4]), p_);
    set_strengths(s, f.subspan(5, 2));
    s.body.speed = parse_double(f[7]);
    s.body.slots[0] = parse_double(f[8]);
    return s;
  }

  std::optional<Raster> render(const TickSnapshot& s) const override {
    constexpr double scale = 10.0;
    const int size = static_cast<int>(std::lround(p_.side * scale));
    Raster img(size, size, {205, 230, 245});
    for (const auto& r : s.individuals) {
      const Vec2 pos = r.body.position.value_or(Vec2{});
      const int px = static_cast<int>(std::lround(pos.x * scale));
      const int py = size - static_cast<int>(std::lround(pos.y * scale));
      const bool veteran = r.body.tag == static_cast<std::int64_t>(pool::SwimmerType::Veteran);
      img.fill_rect(px - 2, py - 2, px + 3, py + 3, veteran ? Color{210, 30, 30} : Color{128, 128, 128});
    }
    return img;
  }

 private:
  pool::Params p_;
};

}  // namespace

std::vector<std::string> scenario_names() { return {"ants", "bees", "geese", "pool"}; }

std::unique_ptr<Scenario> make_scenario(std::string_view name) {
  if (name == "ants") return std::make_unique<AntsScenario>();
  if (name == "bees") return std::make_unique<BeesScenario>();
  if (name == "geese") return std::make_unique<GeeseScenario>();
  if (name == "pool") return std::make_unique<PoolScenario>();
  throw ConfigurationError("unknown scenario '" + std::string(name) + "'");
}

}  // namespace contra
