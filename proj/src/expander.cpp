#include "usdlab/expander.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <sstream>

#include "usdlab/errors.hpp"

namespace usd {

void validate(const PhaseParams& params) {
    if (params.tau < params.hops) throw ParameterError("tau must be >= the hop requirement");
    if (!(params.alpha > 0.0)) throw ParameterError("phase constant alpha must be positive");
    if (!(params.c > 0.0)) throw ParameterError("Chernoff constant c must be positive");
    if (!(params.laziness >= 0.0 && params.laziness < 1.0))
        throw ParameterError("laziness must lie in [0, 1)");
}

std::uint64_t phase_half_length(std::uint64_t hops, std::size_t n, double alpha) {
    const double h = static_cast<double>(hops);
    const double len = alpha * h * h * std::log(static_cast<double>(std::max<std::size_t>(n, 1)));
    return std::max<std::uint64_t>(static_cast<std::uint64_t>(std::ceil(len)), hops);
}

PhaseParams derive_phase_params(const RegularGraph& graph, double alpha, double c, double laziness,
                                std::optional<double> eps) {
    const double n = static_cast<double>(graph.n());
    PhaseParams params;
    params.alpha = alpha;
    params.c = c;
    params.laziness = laziness;
    params.hops = mixing_time_bound(graph, eps.value_or(1.0 / (n * n)), laziness);
    params.tau = phase_half_length(params.hops, graph.n(), alpha);
    validate(params);
    return params;
}

double congestion_bound(std::uint64_t tau, std::size_t n, double c) {
    if (n == 0) throw ParameterError("congestion bound needs n >= 1");
    if (!(c > 0.0)) throw ParameterError("congestion bound needs c > 0");
    const double ln_n = std::log(static_cast<double>(n));
    return std::max(std::sqrt(2.0 * c * static_cast<double>(tau) * ln_n), 6.0 * c * ln_n);
}

namespace {

struct Move {
    std::uint32_t token;
    NodeId from;
    Port port;
};

} // namespace

PhaseResult run_phase(const RegularGraph& graph, const AgentStates& states, const PhaseParams& params,
                      Rng& rng) {
    validate(params);
    const std::size_t n = graph.n();
    const std::size_t d = graph.d();
    if (states.size() != n) throw ValidationError("one agent state per node is required");

    PhaseResult result;
    auto& stats = result.stats;
    auto& tokens = result.tokens;
    tokens.resize(n);
    std::vector<std::deque<std::uint32_t>> queues(n);
    std::size_t pending = 0;
    for (NodeId u = 0; u < n; ++u) {
        tokens[u].owner = tokens[u].at = u;
        tokens[u].path.reserve(params.hops);
        if (params.hops == 0) tokens[u].sampled = states.state[u];
        else ++pending;
        queues[u].push_back(u);
    }
    stats.max_congestion = n > 0 ? 1 : 0;
    stats.histogram.push_back({0, stats.max_congestion, n > 0 ? 1.0 : 0.0});

    std::bernoulli_distribution stay(params.laziness);
    std::uniform_int_distribution<Port> port_pick(0, d > 0 ? static_cast<Port>(d - 1) : 0);
    std::vector<std::vector<Move>> log;
    std::vector<std::pair<NodeId, std::uint32_t>> arrivals;
    std::vector<std::size_t> received(n, 0);
    arrivals.reserve(n);

    // Forward half. Once every token has its hops nothing moves any more,
    // so the idle tail of the half-phase is skipped.
    for (std::uint64_t round = 1; round <= params.tau && pending > 0; ++round) {
        arrivals.clear();
        auto& moves = log.emplace_back();
        for (NodeId u = 0; u < n; ++u) {
            auto& queue = queues[u];
            if (queue.empty()) continue;
            const std::uint32_t id = queue.front();
            queue.pop_front();
            Token& tok = tokens[id];
            NodeId dest = u;
            if (!tok.done(params.hops)) {
                if (d == 0 || stay(rng)) {
                    tok.path.push_back(kStay);
                } else {
                    const Port p = port_pick(rng);
                    tok.path.push_back(p);
                    dest = graph.neighbor(u, p);
                    moves.push_back({id, u, p});
                }
                ++tok.hops;
                if (tok.done(params.hops)) {
                    tok.sampled = states.state[dest];
                    --pending;
                }
            }
            arrivals.emplace_back(dest, id);
        }

        std::fill(received.begin(), received.end(), 0);
        for (const auto& [dest, id] : arrivals) {
            if (tokens[id].at != dest) ++received[dest];
            tokens[id].at = dest;
            queues[dest].push_back(id);
        }

        std::size_t total = 0;
        std::size_t busiest = 0;
        std::size_t occupied = 0;
        for (NodeId u = 0; u < n; ++u) {
            const std::size_t len = queues[u].size();
            total += len;
            busiest = std::max(busiest, len);
            if (len > 0) ++occupied;
            stats.max_received_per_round = std::max(stats.max_received_per_round, received[u]);
        }
        for (const auto& tok : tokens)
            if (tok.hops > round) stats.hops_within_rounds = false;
        if (total != n) stats.tokens_conserved = false;
        stats.max_congestion = std::max(stats.max_congestion, busiest);
        stats.histogram.push_back(
            {round, busiest, occupied > 0 ? static_cast<double>(total) / static_cast<double>(occupied) : 0.0});
        stats.forward_transmissions.push_back(moves.size());
        stats.active_rounds = round;
    }

    // Per-node send discipline: at most one transmission per node per round.
    for (const auto& moves : log) {
        std::vector<NodeId> senders;
        senders.reserve(moves.size());
        for (const auto& m : moves) senders.push_back(m.from);
        std::sort(senders.begin(), senders.end());
        std::size_t run = 0;
        for (std::size_t i = 0; i < senders.size(); ++i) {
            run = (i > 0 && senders[i] == senders[i - 1]) ? run + 1 : 1;
            stats.max_sent_per_round = std::max(stats.max_sent_per_round, run);
        }
    }

    // Backward half: each forward round is replayed in reverse, latest
    // first, every token hopping back over the link it arrived on.
    for (auto round = log.rbegin(); round != log.rend(); ++round) {
        for (auto m = round->rbegin(); m != round->rend(); ++m) {
            Token& tok = tokens[m->token];
            const PortLink& out = graph.link(m->from, m->port);
            if (tok.at != out.node) {
                stats.tokens_conserved = false;
                continue;
            }
            tok.at = graph.link(out.node, out.reverse).node;
        }
        stats.backward_transmissions.push_back(round->size());
    }

    stats.all_returned = std::all_of(tokens.begin(), tokens.end(),
                                     [](const Token& t) { return t.at == t.owner; });

    result.states = states;
    for (NodeId u = 0; u < n; ++u) {
        const Token& tok = tokens[u];
        if (tok.sampled) {
            ++stats.tokens_completed;
            result.states.state[u] = update_rule(states.state[u], *tok.sampled);
        } else {
            ++stats.tokens_incomplete;
        }
    }
    return result;
}

ExpanderTrace run_expander(const RegularGraph& graph, const AgentStates& states, const PhaseParams& params,
                           const ExpanderRunParams& run_params, Rng& rng) {
    validate(params);
    if (run_params.max_phases < 1) throw ValidationError("max_phases must be >= 1");
    if (run_params.record_every < 1) throw ValidationError("record_every must be >= 1");

    ExpanderTrace out;
    auto& trace = out.trace;
    trace.initial = config_from_agents(states);
    trace.seed = run_params.seed;
    trace.rows.push_back(make_row(0, trace.initial, run_params.alpha_hint));

    AgentStates current = states;
    ColorConfiguration config = trace.initial;
    std::optional<Outcome> outcome = classify(trace.initial, config, trace.winner);
    std::uint64_t phase = 0;
    while (!outcome && phase < run_params.max_phases) {
        ++phase;
        auto result = run_phase(graph, current, params, rng);
        current = std::move(result.states);
        config = config_from_agents(current);
        outcome = classify(trace.initial, config, trace.winner);
        const bool last = outcome.has_value() || phase == run_params.max_phases;
        if (phase == 1 || last || phase % run_params.record_every == 0) {
            trace.rows.push_back(make_row(phase, config, run_params.alpha_hint));
            out.phases.push_back(std::move(result.stats));
        }
    }
    if (outcome) {
        trace.outcome = *outcome;
        trace.convergence_round = phase;
    } else {
        trace.outcome = Outcome::timeout;
    }
    trace.final_config = std::move(config);
    return out;
}

nlohmann::json to_json(const PhaseStats& s) {
    return nlohmann::json{{"max_congestion", s.max_congestion},
                          {"tokens_completed", s.tokens_completed},
                          {"tokens_incomplete", s.tokens_incomplete},
                          {"all_returned", s.all_returned},
                          {"active_rounds", s.active_rounds},
                          {"max_sent_per_round", s.max_sent_per_round},
                          {"max_received_per_round", s.max_received_per_round},
                          {"tokens_conserved", s.tokens_conserved},
                          {"hops_within_rounds", s.hops_within_rounds}};
}

std::string congestion_csv(const PhaseStats& stats) {
    std::ostringstream os;
    os << "round,max_queue,mean_queue\n";
    for (const auto& h : stats.histogram)
        os << h.round << ',' << h.max_queue << ',' << format_double(h.mean_queue) << '\n';
    return os.str();
}

std::string expander_trace_csv(const ExpanderTrace& trace) {
    std::istringstream base(trace_csv(trace.trace));
    std::ostringstream os;
    std::string line;
    std::getline(base, line);
    os << line << ",max_congestion,tokens_completed,active_rounds\n";
    std::size_t row = 0;
    while (std::getline(base, line)) {
        os << line;
        if (row == 0) {
            os << ",,,";
        } else {
            const auto& s = trace.phases[row - 1];
            os << ',' << s.max_congestion << ',' << s.tokens_completed << ',' << s.active_rounds;
        }
        os << '\n';
        ++row;
    }
    return os.str();
}

} // namespace usd
