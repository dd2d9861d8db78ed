#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace usd {

/// The one seeded random source a run owns.
using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent child seeds from a
/// (seed, stream) pair so parallel runs never share a generator.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Binomial(trials, p) with the degenerate endpoints handled exactly.
std::int64_t sample_binomial(Rng& rng, std::int64_t trials, double p);

/// Multinomial split of `trials` over cells with integer weights. Drawn as a
/// chain of conditional binomials; `out` must have the same size as
/// `weights`. A zero total weight is only legal with zero trials.
void sample_multinomial(Rng& rng, std::int64_t trials,
                        std::span<const std::int64_t> weights,
                        std::span<std::int64_t> out);

} // namespace usd
