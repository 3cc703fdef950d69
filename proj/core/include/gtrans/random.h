#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gtrans {

using Rng = std::mt19937_64;

// Derives an independent, labeled sub-seed. Every stochastic component of an
// experiment draws from its own stream: SubSeed(base, "train"),
// SubSeed(base, "adapt", epoch), ...
std::uint64_t SubSeed(std::uint64_t base, std::string_view label, std::uint64_t index = 0);

inline Rng MakeRng(std::uint64_t seed) { return Rng(seed); }

}  // namespace gtrans
