#pragma once

#include <cstdint>
#include <random>

namespace superf {

/// Seeded random stream with platform-independent uniform and normal
/// variates (std distributions are implementation-defined, the engine is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream derived from (seed, stream index).
  static Rng substream(std::uint64_t seed, std::uint64_t stream);

  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  double normal();   // N(0, 1)
  std::uint64_t below(std::uint64_t n);  // [0, n)

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace superf
