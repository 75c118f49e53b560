#pragma once
// Counter-based deterministic randomness for simulations. Each coin is a pure
// function of (master seed, replicate, step, edge index), so traces are
// byte-identical across runs and platforms and independent of evaluation
// order; no generator state is carried between draws.

#include <cstdint>

namespace vsdyn::detail {

// SplitMix64 finalizer: a well-mixed 64-bit hash step.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Uniform double in [0, 1) keyed on the full coordinate tuple.
inline double coin(std::uint64_t seed, std::uint64_t replicate,
                   std::uint64_t step, std::uint64_t edge) {
  const std::uint64_t h =
      mix64(mix64(mix64(mix64(seed) ^ replicate) ^ step) ^ edge);
  // Top 53 bits give a dyadic rational in [0, 1) with full double precision.
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace vsdyn::detail
