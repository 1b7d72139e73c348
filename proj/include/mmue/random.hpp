#pragma once

#include <cstdint>

#include <boost/random/mersenne_twister.hpp>

namespace mmue {

/// Every stochastic routine owns a private engine built from an explicit seed.
/// boost::random's engine and distributions produce the same streams on every
/// platform, which std::*_distribution does not guarantee.
using Rng = boost::random::mt19937_64;

using Seed = std::uint64_t;

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t v) noexcept;

/// Deterministic child seed: mix64 chained over (parent, a, b).
/// Used for (base seed, sweep index, trial index) and for per-stream splits.
Seed derive_seed(Seed parent, std::uint64_t a, std::uint64_t b = 0) noexcept;

}  // namespace mmue
