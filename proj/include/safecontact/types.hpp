#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace safecontact {

using Vec3 = Eigen::Vector3d;
using Observation = Eigen::Matrix<double, 9, 1>;

/// All stochastic components draw from a 64-bit Mersenne Twister seeded
/// explicitly; no component reads global or time-based entropy.
using Rng = std::mt19937_64;

inline constexpr int kObsDim = 9;
inline constexpr int kActDim = 3;

/// Derives an independent stream seed from a base seed and a stream tag
/// (splitmix64 finalizer).
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace safecontact
