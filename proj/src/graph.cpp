#include "usdlab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "usdlab/errors.hpp"

namespace usd {

namespace {

void check_shape(std::size_t n, std::size_t d) {
    if ((n * d) % 2 != 0) throw ParameterError("n * d must be even");
    if (n > 0 && d >= n) throw ParameterError("degree must be smaller than n");
    if (d > 65535) throw ParameterError("degree exceeds the port range");
    if (n > 0xFFFFFFFFu) throw ParameterError("too many nodes");
}

} // namespace

RegularGraph RegularGraph::from_edges(std::size_t n, std::size_t d,
                                      const std::vector<std::pair<NodeId, NodeId>>& edges) {
    try {
        check_shape(n, d);
    } catch (const ParameterError& e) {
        throw ValidationError(e.what());
    }
    if (edges.size() * 2 != n * d) throw ValidationError("edge count does not match n * d / 2");

    std::vector<std::vector<NodeId>> adj(n);
    for (auto [u, v] : edges) {
        if (u >= n || v >= n) throw ValidationError("edge endpoint out of range");
        if (u == v) throw ValidationError("self-loop at node " + std::to_string(u));
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    for (NodeId u = 0; u < n; ++u) {
        auto& a = adj[u];
        if (a.size() != d) throw ValidationError("node " + std::to_string(u) + " has degree " +
                                                 std::to_string(a.size()));
        std::sort(a.begin(), a.end());
        if (std::adjacent_find(a.begin(), a.end()) != a.end())
            throw ValidationError("repeated edge at node " + std::to_string(u));
    }

    RegularGraph g;
    g.n_ = n;
    g.d_ = d;
    g.ports_.resize(n * d);
    for (NodeId u = 0; u < n; ++u) {
        for (std::size_t p = 0; p < d; ++p) {
            const NodeId v = adj[u][p];
            const auto& back = adj[v];
            const auto it = std::lower_bound(back.begin(), back.end(), u);
            g.ports_[u * d + p] = {v, static_cast<Port>(it - back.begin())};
        }
    }
    return g;
}

std::vector<std::pair<NodeId, NodeId>> RegularGraph::edges() const {
    std::vector<std::pair<NodeId, NodeId>> out;
    out.reserve(n_ * d_ / 2);
    for (NodeId u = 0; u < n_; ++u)
        for (Port p = 0; p < d_; ++p)
            if (u < neighbor(u, p)) out.emplace_back(u, neighbor(u, p));
    return out;
}

bool RegularGraph::is_connected() const {
    if (n_ <= 1) return true;
    std::vector<bool> seen(n_, false);
    std::deque<NodeId> todo{0};
    seen[0] = true;
    std::size_t reached = 1;
    while (!todo.empty()) {
        const NodeId u = todo.front();
        todo.pop_front();
        for (Port p = 0; p < d_; ++p) {
            const NodeId v = neighbor(u, p);
            if (!seen[v]) {
                seen[v] = true;
                ++reached;
                todo.push_back(v);
            }
        }
    }
    return reached == n_;
}

RegularGraph gen_regular_graph(std::size_t n, std::size_t d, Rng& rng, std::size_t max_restarts) {
    check_shape(n, d);
    const std::size_t points = n * d;

    for (std::size_t attempt = 0; attempt <= max_restarts; ++attempt) {
        std::vector<std::uint32_t> open(points);
        for (std::size_t i = 0; i < points; ++i) open[i] = static_cast<std::uint32_t>(i);
        std::vector<std::vector<NodeId>> adj(n);
        std::vector<std::pair<NodeId, NodeId>> edges;
        edges.reserve(points / 2);

        auto suitable = [&](std::size_t i, std::size_t j) {
            const NodeId u = open[i] / d;
            const NodeId v = open[j] / d;
            return u != v && std::find(adj[u].begin(), adj[u].end(), v) == adj[u].end();
        };
        auto take = [&](std::size_t i, std::size_t j) {
            const NodeId u = open[i] / d;
            const NodeId v = open[j] / d;
            adj[u].push_back(v);
            adj[v].push_back(u);
            edges.emplace_back(std::min(u, v), std::max(u, v));
            if (i < j) std::swap(i, j);
            open[i] = open.back();
            open.pop_back();
            open[j] = open.back();
            open.pop_back();
        };

        bool stuck = false;
        while (!open.empty()) {
            bool paired = false;
            for (int tries = 0; tries < 64; ++tries) {
                std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
                const std::size_t i = pick(rng);
                const std::size_t j = pick(rng);
                if (i != j && suitable(i, j)) {
                    take(i, j);
                    paired = true;
                    break;
                }
            }
            if (paired) continue;
            // Random probing failed; list every legal pair and draw one.
            std::vector<std::pair<std::size_t, std::size_t>> legal;
            for (std::size_t i = 0; i < open.size(); ++i)
                for (std::size_t j = i + 1; j < open.size(); ++j)
                    if (suitable(i, j)) legal.emplace_back(i, j);
            if (legal.empty()) {
                stuck = true;
                break;
            }
            std::uniform_int_distribution<std::size_t> pick(0, legal.size() - 1);
            const auto [i, j] = legal[pick(rng)];
            take(i, j);
        }
        if (!stuck) return RegularGraph::from_edges(n, d, edges);
    }
    throw GenerationError("could not complete a simple pairing within the restart budget");
}

std::string audit_graph(const RegularGraph& g) {
    for (NodeId u = 0; u < g.n(); ++u) {
        for (Port p = 0; p < g.d(); ++p) {
            const auto& l = g.link(u, p);
            if (l.node == u) return "self-loop at node " + std::to_string(u);
            if (l.node >= g.n()) return "dangling port at node " + std::to_string(u);
            if (l.reverse >= g.d()) return "reverse port out of range at node " + std::to_string(u);
            const auto& back = g.link(l.node, l.reverse);
            if (back.node != u || back.reverse != p)
                return "port reciprocity broken at node " + std::to_string(u) + " port " + std::to_string(p);
            for (Port p2 = 0; p2 < p; ++p2)
                if (g.neighbor(u, p2) == l.node) return "repeated edge at node " + std::to_string(u);
        }
    }
    return {};
}

namespace {

void check_walk_params(const RegularGraph& graph, double laziness) {
    if (!(laziness > 0.0 && laziness < 1.0)) throw ParameterError("laziness must lie in (0, 1)");
    if (!graph.is_connected()) throw MixingError("graph is disconnected; mixing time undefined");
}

/// One lazy-walk step applied to a row vector of probabilities.
void walk_step(const RegularGraph& g, double laziness, const double* cur, double* next) {
    const double move = (1.0 - laziness) / static_cast<double>(g.d());
    for (NodeId v = 0; v < g.n(); ++v) {
        double in = 0.0;
        for (Port p = 0; p < g.d(); ++p) in += cur[g.neighbor(v, p)];
        next[v] = laziness * cur[v] + move * in;
    }
}

double tv_to_uniform(const double* row, std::size_t n) {
    const double u = 1.0 / static_cast<double>(n);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::abs(row[i] - u);
    return 0.5 * s;
}

constexpr std::uint64_t kMaxWalkSteps = 1000000;

/// Walks all rows in `starts` forward until `stop(t, worst_tv)` says so.
template <class Stop>
void walk_rows(const RegularGraph& g, double laziness, const std::vector<NodeId>& starts, Stop&& stop) {
    const std::size_t n = g.n();
    std::vector<double> cur(starts.size() * n, 0.0);
    std::vector<double> next(starts.size() * n, 0.0);
    for (std::size_t s = 0; s < starts.size(); ++s) cur[s * n + starts[s]] = 1.0;
    for (std::uint64_t t = 0;; ++t) {
        double worst = 0.0;
        for (std::size_t s = 0; s < starts.size(); ++s)
            worst = std::max(worst, tv_to_uniform(&cur[s * n], n));
        if (stop(t, worst)) return;
        if (t >= kMaxWalkSteps) throw NumericError("lazy walk failed to mix within the step limit");
        for (std::size_t s = 0; s < starts.size(); ++s) walk_step(g, laziness, &cur[s * n], &next[s * n]);
        cur.swap(next);
    }
}

std::vector<NodeId> all_nodes(const RegularGraph& g) {
    std::vector<NodeId> v(g.n());
    for (NodeId i = 0; i < g.n(); ++i) v[i] = i;
    return v;
}

std::vector<NodeId> sampled_nodes(const RegularGraph& g) {
    constexpr std::size_t kSamples = 32;
    std::vector<NodeId> v;
    for (std::size_t i = 0; i < kSamples; ++i) v.push_back(static_cast<NodeId>(i * g.n() / kSamples));
    return v;
}

std::uint64_t first_below(const RegularGraph& g, double laziness, const std::vector<NodeId>& starts,
                          double eps) {
    std::uint64_t found = 0;
    walk_rows(g, laziness, starts, [&](std::uint64_t t, double worst) {
        if (worst <= eps) {
            found = t;
            return true;
        }
        return false;
    });
    return found;
}

} // namespace

std::vector<double> worst_tv_profile(const RegularGraph& graph, std::uint64_t steps, double laziness) {
    check_walk_params(graph, laziness);
    std::vector<double> out;
    walk_rows(graph, laziness, all_nodes(graph), [&](std::uint64_t t, double worst) {
        out.push_back(worst);
        return t >= steps;
    });
    return out;
}

MixingTime mixing_time(const RegularGraph& graph, double eps, double laziness) {
    if (!(eps > 0.0)) throw ParameterError("eps must be positive");
    check_walk_params(graph, laziness);
    if (eps >= 1.0) return {0, MixingMode::exact};
    if (graph.n() <= kExactMixingLimit)
        return {first_below(graph, laziness, all_nodes(graph), eps), MixingMode::exact};

    const double base_eps = 1.0 / (2.0 * std::numbers::e);
    const auto starts = sampled_nodes(graph);
    if (eps >= base_eps) return {first_below(graph, laziness, starts, eps), MixingMode::estimated};
    const auto base = first_below(graph, laziness, starts, base_eps);
    const auto factor = static_cast<std::uint64_t>(std::ceil(std::log(1.0 / eps)));
    return {factor * base, MixingMode::estimated};
}

std::uint64_t mixing_time_bound(const RegularGraph& graph, double eps, double laziness) {
    if (!(eps > 0.0)) throw ParameterError("eps must be positive");
    const auto factor = static_cast<std::uint64_t>(std::ceil(std::log(1.0 / eps)));
    if (factor == 0) return 0;
    return factor * mixing_time(graph, 1.0 / (2.0 * std::numbers::e), laziness).rounds;
}

void write_graph(std::ostream& out, const RegularGraph& graph) {
    out << nlohmann::json{{"n", graph.n()}, {"d", graph.d()}}.dump() << '\n';
    for (auto [u, v] : graph.edges()) out << u << ' ' << v << '\n';
}

std::string graph_text(const RegularGraph& graph) {
    std::ostringstream os;
    write_graph(os, graph);
    return os.str();
}

RegularGraph read_graph(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw ValidationError("graph file is empty");
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(header);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bad graph header: ") + e.what());
    }
    const auto n = h.at("n").get<std::size_t>();
    const auto d = h.at("d").get<std::size_t>();
    std::vector<std::pair<NodeId, NodeId>> edges;
    NodeId u = 0;
    NodeId v = 0;
    while (in >> u >> v) edges.emplace_back(u, v);
    if (!in.eof()) throw ValidationError("malformed edge line");
    return RegularGraph::from_edges(n, d, edges);
}

} // namespace usd
