#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "usdlab/rng.hpp"

namespace usd {

using NodeId = std::uint32_t;
using Port = std::uint16_t;

/// Far end of a port: the neighbor and the port number it uses for the same
/// edge.
struct PortLink {
    NodeId node = 0;
    Port reverse = 0;
    friend bool operator==(const PortLink&, const PortLink&) = default;
};

/// Simple d-regular graph addressed by per-node port tables. Ports of a
/// node are numbered 0..d-1 in ascending neighbor order.
class RegularGraph {
public:
    RegularGraph() = default;

    /// Builds port tables from an edge list. Throws ValidationError unless
    /// the edges form a simple d-regular graph on n nodes.
    static RegularGraph from_edges(std::size_t n, std::size_t d,
                                   const std::vector<std::pair<NodeId, NodeId>>& edges);

    std::size_t n() const noexcept { return n_; }
    std::size_t d() const noexcept { return d_; }

    const PortLink& link(NodeId u, Port p) const noexcept { return ports_[u * d_ + p]; }
    NodeId neighbor(NodeId u, Port p) const noexcept { return link(u, p).node; }

    /// Each undirected edge once, u < v, sorted.
    std::vector<std::pair<NodeId, NodeId>> edges() const;

    bool is_connected() const;

    friend bool operator==(const RegularGraph&, const RegularGraph&) = default;

private:
    std::size_t n_ = 0;
    std::size_t d_ = 0;
    std::vector<PortLink> ports_;
};

/// Random simple d-regular graph from the pairing model. Points are paired
/// one random pair at a time, rejecting pairs that would create a loop or a
/// repeated edge; a pairing that gets stuck is discarded and restarted.
RegularGraph gen_regular_graph(std::size_t n, std::size_t d, Rng& rng,
                               std::size_t max_restarts = 1000);

/// Checks simplicity, regularity, and port reciprocity; empty string if the
/// graph is well formed, else a description of the first violation.
std::string audit_graph(const RegularGraph& graph);

enum class MixingMode { exact, estimated };

struct MixingTime {
    std::uint64_t rounds = 0;
    MixingMode mode = MixingMode::exact;
};

inline constexpr std::size_t kExactMixingLimit = 2048;

/// Worst-start total variation of the lazy walk after `steps` steps, for
/// every step count 0..steps (index = step count).
std::vector<double> worst_tv_profile(const RegularGraph& graph, std::uint64_t steps,
                                     double laziness = 0.5);

/// First t with worst-start TV(P^t(u, .), uniform) <= eps for the lazy
/// walk. Exact up to kExactMixingLimit nodes; beyond that the worst case
/// over a sample of start nodes at eps' = 1/(2e) is scaled by
/// ceil(ln(1/eps)) and flagged as estimated.
MixingTime mixing_time(const RegularGraph& graph, double eps, double laziness = 0.5);

/// ceil(ln(1/eps)) * tm(G, 1/(2e)): the hop budget for a walk to be
/// eps-close to uniform.
std::uint64_t mixing_time_bound(const RegularGraph& graph, double eps, double laziness = 0.5);

/// Edge-list format: a JSON header line {"n":..,"d":..} followed by one
/// "u v" line per edge.
void write_graph(std::ostream& out, const RegularGraph& graph);
std::string graph_text(const RegularGraph& graph);
RegularGraph read_graph(std::istream& in);

} // namespace usd
