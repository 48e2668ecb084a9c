#pragma once

#include <array>
#include <cstdint>
#include <random>

namespace uwbpos {

/// Independent random streams derived from one master seed.
enum class SeedStream : std::uint32_t {
  Calibration = 1,
  WeightInit = 2,
  Shuffle = 3,
  Augmentation = 4,
  Evaluation = 5,
};

/// Mixes (master, stream, index) into a 64-bit seed. Distinct triples give
/// statistically independent generators, so per-lane results do not depend
/// on evaluation order.
inline std::uint64_t derive_seed(std::uint64_t master, SeedStream stream, std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace uwbpos
