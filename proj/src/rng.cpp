#include "usdlab/rng.hpp"

#include <cassert>

namespace usd {

std::int64_t sample_binomial(Rng& rng, std::int64_t trials, double p) {
    if (trials <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return trials;
    std::binomial_distribution<std::int64_t> dist(trials, p);
    return dist(rng);
}

void sample_multinomial(Rng& rng, std::int64_t trials,
                        std::span<const std::int64_t> weights,
                        std::span<std::int64_t> out) {
    assert(weights.size() == out.size());
    std::int64_t mass = 0;
    for (auto w : weights) mass += w;
    std::int64_t left = trials;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        if (left == 0 || mass == 0) {
            out[j] = 0;
            continue;
        }
        if (weights[j] == mass) {
            out[j] = left;
            left = 0;
            mass = 0;
            continue;
        }
        const double p = static_cast<double>(weights[j]) / static_cast<double>(mass);
        out[j] = sample_binomial(rng, left, p);
        left -= out[j];
        mass -= weights[j];
    }
}

} // namespace usd
