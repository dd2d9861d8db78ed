#include "usdlab/complete.hpp"

#include <algorithm>

#include "usdlab/errors.hpp"

namespace usd {

AgentStates agents_from_config(const ColorConfiguration& config) {
    AgentStates out;
    const auto by_label = config.by_label();
    out.k = by_label.size();
    out.state.reserve(static_cast<std::size_t>(config.n()));
    for (std::size_t i = 0; i < by_label.size(); ++i)
        out.state.insert(out.state.end(), static_cast<std::size_t>(by_label[i]),
                         static_cast<ColorLabel>(i + 1));
    out.state.insert(out.state.end(), static_cast<std::size_t>(config.undecided()), kUndecided);
    return out;
}

AgentStates agents_from_config(const ColorConfiguration& config, Rng& rng) {
    auto out = agents_from_config(config);
    std::shuffle(out.state.begin(), out.state.end(), rng);
    return out;
}

ColorConfiguration config_from_agents(const AgentStates& agents) {
    if (agents.k == 0) throw ValidationError("agent states need k >= 1");
    std::vector<Count> counts(agents.k, 0);
    Count q = 0;
    for (ColorLabel s : agents.state) {
        if (s == kUndecided) {
            ++q;
        } else if (s > agents.k) {
            throw ValidationError("agent color outside 1..k");
        } else {
            ++counts[s - 1];
        }
    }
    return make_config(counts, q);
}

ColorConfiguration step(const ColorConfiguration& config, Rng& rng) {
    const auto& counts = config.counts();
    const std::size_t k = counts.size();
    const Count n = config.n();
    const Count q = config.undecided();
    if (n <= 0) return config;

    std::vector<Count> next(k, 0);
    Count next_q = 0;

    // A color-i agent keeps its color when it sees i or an undecided agent,
    // otherwise it turns undecided.
    for (std::size_t i = 0; i < k; ++i) {
        const Count ci = counts[i];
        if (ci == 0) continue;
        const double keep = static_cast<double>(ci + q) / static_cast<double>(n);
        const Count kept = sample_binomial(rng, ci, keep);
        next[i] += kept;
        next_q += ci - kept;
    }

    // An undecided agent adopts whatever it sees.
    if (q > 0) {
        std::vector<Count> weights(counts.begin(), counts.end());
        weights.push_back(q);
        std::vector<Count> split(k + 1, 0);
        sample_multinomial(rng, q, weights, split);
        for (std::size_t i = 0; i < k; ++i) next[i] += split[i];
        next_q += split[k];
    }

    return ColorConfiguration::with_labels(std::move(next), config.labels(), next_q);
}

AgentStates step_agentwise(const AgentStates& agents, Rng& rng) {
    if (agents.state.empty()) throw ValidationError("step_agentwise needs at least one agent");
    AgentStates out = agents;
    std::uniform_int_distribution<std::size_t> pick(0, agents.size() - 1);
    for (std::size_t u = 0; u < agents.size(); ++u)
        out.state[u] = update_rule(agents.state[u], agents.state[pick(rng)]);
    return out;
}

void validate(const RunParams& params) {
    if (params.max_rounds < 1) throw ValidationError("max_rounds must be >= 1");
    if (params.record_every < 1) throw ValidationError("record_every must be >= 1");
}

RunTrace run(const ColorConfiguration& config, const RunParams& params, Rng& rng) {
    validate(params);
    RunTrace trace;
    trace.initial = config;
    trace.seed = params.seed;
    if (config.undecided() > 0)
        trace.warnings.push_back("initial configuration has q > 0; continuing from a mid-trajectory state");

    ColorConfiguration current = config;
    trace.rows.push_back(make_row(0, current, params.alpha_hint));

    std::optional<Outcome> outcome = classify(trace.initial, current, trace.winner);
    std::uint64_t round = 0;
    while (!outcome && round < params.max_rounds) {
        ++round;
        current = step(current, rng);
        outcome = classify(trace.initial, current, trace.winner);
        const bool last = outcome.has_value() || round == params.max_rounds;
        if (round == 1 || last || round % params.record_every == 0)
            trace.rows.push_back(make_row(round, current, params.alpha_hint));
    }

    if (outcome) {
        trace.outcome = *outcome;
        trace.convergence_round = round;
    } else {
        trace.outcome = Outcome::timeout;
    }
    trace.final_config = std::move(current);
    return trace;
}

} // namespace usd
