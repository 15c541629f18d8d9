#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace embspace {

// Deterministic random source. The engine is std::mt19937_64 (its output
// sequence is pinned by the standard); all value conversions are done here
// rather than through std::*_distribution, whose results vary between
// standard library implementations. Every randomized stage of the toolkit
// draws from one of these, seeded explicitly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent stream for (seed, stream_index). Used wherever work items
  // (samples, hubs) need their own generator so that results do not depend
  // on scheduling order.
  static Rng derive(std::uint64_t seed, std::uint64_t stream) {
    return Rng(mix(mix(seed) ^ mix(stream + 0x632be59bd9b4e019ULL)));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double next_double() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Unbiased uniform integer in [0, bound). bound must be > 0.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
    std::uint64_t draw;
    do {
      draw = engine_();
    } while (draw >= limit);
    return draw % bound;
  }

  double uniform(double lo, double hi) {
    return lo + next_double() * (hi - lo);
  }

  // Standard normal via Box-Muller, one value per call.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = next_double();
    } while (u1 <= 0.0);
    const double u2 = next_double();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace embspace
