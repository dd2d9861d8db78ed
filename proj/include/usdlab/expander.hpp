#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "json.hpp"

#include "usdlab/complete.hpp"
#include "usdlab/graph.hpp"
#include "usdlab/rng.hpp"
#include "usdlab/trace.hpp"

namespace usd {

/// Path entry for a lazy step that did not leave the node.
inline constexpr Port kStay = std::numeric_limits<Port>::max();

/// A random-walk probe. `path` holds one entry per movement decision.
struct Token {
    NodeId owner = 0;
    NodeId at = 0;
    std::vector<Port> path;
    std::uint64_t hops = 0;
    std::optional<ColorLabel> sampled;

    bool done(std::uint64_t required) const noexcept { return hops >= required; }
};

struct PhaseParams {
    /// Hops a token must make before it samples (t-bar).
    std::uint64_t hops = 0;
    /// Length of each half of the phase, in rounds.
    std::uint64_t tau = 0;
    /// Phase-length constant: tau = ceil(alpha * hops^2 * ln n) when derived.
    double alpha = 4.0;
    /// Chernoff constant of the congestion bound.
    double c = 3.0;
    double laziness = 0.5;
};

void validate(const PhaseParams& params);

/// tau = ceil(alpha * hops^2 * ln n).
std::uint64_t phase_half_length(std::uint64_t hops, std::size_t n, double alpha);

/// Derives hops = ceil(ln(1/eps)) tm(G, 1/(2e)) and tau from it.
/// `eps` defaults to 1/n^2.
PhaseParams derive_phase_params(const RegularGraph& graph, double alpha, double c, double laziness,
                                std::optional<double> eps = std::nullopt);

/// Per-round queue summary of the forward half.
struct CongestionSample {
    std::uint64_t round = 0;
    std::size_t max_queue = 0;
    /// Mean length over non-empty queues.
    double mean_queue = 0.0;
};

struct PhaseStats {
    /// Max over nodes and rounds of the queue length, round 0 included.
    std::size_t max_congestion = 0;
    std::size_t tokens_completed = 0;
    std::size_t tokens_incomplete = 0;
    bool all_returned = false;
    /// Forward rounds in which at least one token still needed hops; the
    /// remaining forward rounds (and their backward mirror) move nothing.
    std::uint64_t active_rounds = 0;
    std::vector<CongestionSample> histogram;

    // Audit counters.
    std::size_t max_sent_per_round = 0;
    std::size_t max_received_per_round = 0;
    bool tokens_conserved = true;
    bool hops_within_rounds = true;
    std::vector<std::size_t> forward_transmissions;
    std::vector<std::size_t> backward_transmissions;
};

struct PhaseResult {
    AgentStates states;
    PhaseStats stats;
    std::vector<Token> tokens;
};

/// One forward/backward token phase followed by the color update. Nodes
/// are served in ascending id; arrivals join a queue in ascending sender id.
/// A lazy STAY uses the node's send slot for the round.
PhaseResult run_phase(const RegularGraph& graph, const AgentStates& states, const PhaseParams& params,
                      Rng& rng);

/// max{ sqrt(2 c tau ln n), 6 c ln n }.
double congestion_bound(std::uint64_t tau, std::size_t n, double c);

struct ExpanderRunParams {
    std::uint64_t max_phases = 1000;
    std::uint64_t record_every = 1;
    double alpha_hint = 0.2;
    std::uint64_t seed = 1;
};

struct ExpanderTrace {
    RunTrace trace;
    /// Parallel to trace.rows except row 0 (no phase has run yet).
    std::vector<PhaseStats> phases;
};

/// Repeats run_phase until the coloring is absorbed or the phase budget
/// runs out. Trace rounds count phases.
ExpanderTrace run_expander(const RegularGraph& graph, const AgentStates& states, const PhaseParams& params,
                           const ExpanderRunParams& run_params, Rng& rng);

nlohmann::json to_json(const PhaseStats& stats);
/// round,max_queue,mean_queue
std::string congestion_csv(const PhaseStats& stats);
/// Trace columns plus max_congestion and tokens_completed per phase.
std::string expander_trace_csv(const ExpanderTrace& trace);

} // namespace usd
