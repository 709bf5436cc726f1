#pragma once

#include <cstdint>
#include <random>

namespace gosta {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent per-run seeds.
constexpr std::uint64_t mix_seed(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for run `index` of an experiment seeded with `base`.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
  return mix_seed(mix_seed(base) ^ (index * 0xd1b54a32d192ed03ULL + 1));
}

}  // namespace gosta
