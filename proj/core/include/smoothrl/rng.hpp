#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace smoothrl {

using Rng = std::mt19937_64;

/// Independent generator for one purpose within a run, keyed by (seed, tag),
/// e.g. make_stream(seed, "env"), make_stream(seed, "reg").
Rng make_stream(std::uint64_t seed, std::string_view tag);

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Standard normal via Box-Muller; stateless apart from `rng`, so draws are
/// reproducible across standard-library implementations.
double normal(Rng& rng);

}  // namespace smoothrl
