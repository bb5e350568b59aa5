#pragma once

#include <cstdint>
#include <random>

namespace mrx {

/// mt19937_64 is bit-exact across standard libraries; the std distributions
/// are not, so sampling goes through these helpers.
using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) { return n == 0 ? 0 : rng() % n; }

}  // namespace mrx
