#pragma once

// Deterministic random streams. Every stochastic entry point takes an
// explicit 64-bit seed; independent streams (one per simulated path) get
// their seeds from derive_stream_seed, a pure function of the master seed
// and the stream index, so any path can be reproduced in isolation and
// results do not depend on how work is scheduled across threads.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace illiq {

// One step of the splitmix64 sequence whose state is x (Vigna's mixer).
inline std::uint64_t splitmix64(std::uint64_t x) {
  std::uint64_t z = x + 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Seed of the index-th stream of a run: the index-th output of the
// splitmix64 sequence started at master (wrap-around is intentional).
inline std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master + 0x9E3779B97F4A7C15ull * index);
}

// mt19937_64 (whose seeding and output are fully specified by the
// standard) plus a Box-Muller transform we own, so the draw sequence is
// identical on every platform for a given seed.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Standard normal; Box-Muller with the companion deviate cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]: keeps log() finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace illiq
