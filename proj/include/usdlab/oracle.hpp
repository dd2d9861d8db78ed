#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "json.hpp"

#include "usdlab/config.hpp"

namespace usd {

/// Label-resolved state key: counts by label (1..k), then q.
using StateKey = std::vector<Count>;

StateKey state_key(const ColorConfiguration& config);
ColorConfiguration config_from_key(const StateKey& key);

/// Size guards for the exact computations.
struct OracleLimits {
    Count max_n = 12;
    std::size_t max_k = 3;
    std::size_t max_states = 100000;
    /// Largest transient space handed to the dense linear solve.
    std::size_t max_solve_states = 5000;
};

/// Exact law of the next configuration.
struct ConfigDistribution {
    std::size_t k = 0;
    Count n = 0;
    std::map<StateKey, double> probs;

    double total() const;
    double probability(const ColorConfiguration& config) const;
};

/// C(n + k, k): configurations of n agents over k colors plus the undecided
/// slot. Saturates at SIZE_MAX.
std::size_t configuration_space_size(Count n, std::size_t k);

/// Exact one-step law, convolving the per-community laws (binomial for each
/// color, multinomial for the undecided).
ConfigDistribution exact_step_distribution(const ColorConfiguration& config,
                                           const OracleLimits& limits = {});

/// The same law by enumerating all n^n joint sampling outcomes. n <= 6.
ConfigDistribution enumerate_step_distribution(const ColorConfiguration& config);

struct AbsorptionReport {
    std::size_t k = 0;
    Count n = 0;
    /// Absorbing state -> probability of ending there.
    std::map<StateKey, double> absorption;
    /// E[T] for the solve path; E[min(T, horizon)] for the truncated path.
    double expected_time = 0.0;
    /// Absent when the exact linear solve was used.
    std::optional<std::uint64_t> horizon;
    /// Probability mass still transient at the horizon (0 for the solve).
    double residual = 0.0;
    std::size_t reachable_states = 0;

    /// Probability that every agent ends with color `label`.
    double color_wins(ColorLabel label) const;
    double all_undecided() const;
    double total() const;
};

/// Absorption probabilities and time over the reachable label-resolved
/// chain. Without a horizon the system (I - Q) x = b is solved exactly;
/// with one the chain is iterated for that many rounds.
AbsorptionReport exact_absorption(const ColorConfiguration& config,
                                  std::optional<std::uint64_t> horizon = std::nullopt,
                                  const OracleLimits& limits = {});

/// Total variation between an exact law and empirical frequencies.
double total_variation(const ConfigDistribution& exact, const std::map<StateKey, double>& empirical);

nlohmann::json to_json(const ConfigDistribution& dist);
nlohmann::json to_json(const AbsorptionReport& report);

} // namespace usd
