// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string_view>

namespace latlapmed {

// Deterministic generator (xoshiro256++) with hand-rolled distributions so
// that seeded runs reproduce bit for bit independently of the standard
// library implementation.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on (0, 1]; safe as a log() argument.
  double uniform_pos();
  // Standard normal via Box-Muller.
  double normal();
  // Chi-square with df >= 2 degrees of freedom (Marsaglia-Tsang gamma).
  double chi_square(double df);
  // Unbiased integer in [0, bound), bound >= 1.
  uint64_t below(uint64_t bound);

 private:
  double gamma(double shape);  // scale 1, shape >= 1e-3
  uint64_t s_[4];
};

// Independent generator derived from a root seed and a stream name, so the
// draws of one stage never shift another stage's stream.
Rng substream(uint64_t root_seed, std::string_view name);

}  // namespace latlapmed
