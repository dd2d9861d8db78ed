#pragma once

#include <cstdint>
#include <vector>

#include "usdlab/config.hpp"
#include "usdlab/rng.hpp"
#include "usdlab/trace.hpp"

namespace usd {

/// Per-agent state: 0 = undecided, otherwise a color label in 1..k.
struct AgentStates {
    std::vector<ColorLabel> state;
    std::size_t k = 0;

    std::size_t size() const noexcept { return state.size(); }
    friend bool operator==(const AgentStates&, const AgentStates&) = default;
};

/// The update rule: what an agent in state `self` becomes after seeing `seen`.
constexpr ColorLabel update_rule(ColorLabel self, ColorLabel seen) noexcept {
    if (self == kUndecided) return seen;
    if (seen == kUndecided || seen == self) return self;
    return kUndecided;
}

/// Agents laid out by label: all of color 1 first, ..., undecided last.
AgentStates agents_from_config(const ColorConfiguration& config);
/// Same counts, placed in a uniformly random order.
AgentStates agents_from_config(const ColorConfiguration& config, Rng& rng);
ColorConfiguration config_from_agents(const AgentStates& agents);

/// One synchronous round on the complete graph, sampled per community.
/// Every agent samples one of all n agents (itself included).
ColorConfiguration step(const ColorConfiguration& config, Rng& rng);

/// The same round with every agent drawn individually.
AgentStates step_agentwise(const AgentStates& agents, Rng& rng);

struct RunParams {
    std::uint64_t max_rounds = 100000;
    std::uint64_t record_every = 1;
    double alpha_hint = 0.2;
    std::uint64_t seed = 1;
};

void validate(const RunParams& params);

/// Iterates `step` until absorption or `max_rounds`. Rows 0, 1, every
/// `record_every`-th round, and the last round are recorded.
RunTrace run(const ColorConfiguration& config, const RunParams& params, Rng& rng);

} // namespace usd
