#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace contra {

// Purpose tags keep the draws of different tick phases independent.
enum class Stream : std::uint64_t {
  Setup = 1,
  Relevance = 2,
  Interaction = 3,
  Selection = 4,
  Effect = 5,
  Dynamics = 6,
};

// Individual id reserved for swarm-level draws (pairings, handoff, dynamics).
inline constexpr std::uint64_t kSwarmStreamId = std::numeric_limits<std::uint64_t>::max();

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// SplitMix64 generator. Substreams are derived by hashing (seed, id, tick, purpose),
// so a draw never depends on the order in which individuals are evaluated.
class Rng {
 public:
  using result_type = std::uint64_t;

  constexpr explicit Rng(std::uint64_t state) : state_(state) {}

  static constexpr Rng substream(std::uint64_t seed, std::uint64_t id, std::uint64_t tick,
                                 Stream purpose) {
    std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc909ULL);
    h = mix64(h ^ (id * 0x9e3779b97f4a7c15ULL));
    h = mix64(h ^ (tick * 0xc2b2ae3d27d4eb4fULL));
    h = mix64(h ^ (static_cast<std::uint64_t>(purpose) * 0x165667b19e3779f9ULL));
    return Rng(h);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // Uniform on [0, 1) with 53 random bits.
  constexpr double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  constexpr double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n) by rejection; n must be positive.
  constexpr std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x = (*this)();
    while (x >= limit) x = (*this)();
    return x % n;
  }

  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  [[nodiscard]] constexpr std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

}  // namespace contra
