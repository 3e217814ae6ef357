#pragma once

#include <cstdint>
#include <random>

namespace sparsevar {

// Seedable generator used for every random draw in the library.
//
// Uniforms come from std::mt19937_64 (whose output sequence is fixed by the
// standard) using the top 53 bits. Gaussians use the Marsaglia polar method
// so the draw sequence does not depend on the standard library's
// normal_distribution implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent stream for replicate `index` of a run seeded with `seed`.
  // The stream depends only on (seed, index), never on scheduling order.
  static Rng stream(std::uint64_t seed, std::uint64_t index);

  // Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace sparsevar
