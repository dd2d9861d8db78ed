#include "usdlab/oracle.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include <Eigen/Dense>

#include "usdlab/complete.hpp"
#include "usdlab/errors.hpp"

namespace usd {

StateKey state_key(const ColorConfiguration& config) {
    StateKey key = config.by_label();
    key.push_back(config.undecided());
    return key;
}

ColorConfiguration config_from_key(const StateKey& key) {
    return make_config(std::span<const Count>(key.data(), key.size() - 1), key.back());
}

double ConfigDistribution::total() const {
    double sum = 0.0;
    for (const auto& [key, p] : probs) sum += p;
    return sum;
}

double ConfigDistribution::probability(const ColorConfiguration& config) const {
    auto it = probs.find(state_key(config));
    return it == probs.end() ? 0.0 : it->second;
}

std::size_t configuration_space_size(Count n, std::size_t k) {
    // C(n + k, k), multiplicatively; each partial product is itself a binomial.
    long double acc = 1.0L;
    for (std::size_t i = 1; i <= k; ++i) {
        acc = acc * static_cast<long double>(n + static_cast<Count>(i)) / static_cast<long double>(i);
        if (acc > static_cast<long double>(std::numeric_limits<std::size_t>::max() / 2))
            return std::numeric_limits<std::size_t>::max();
    }
    return static_cast<std::size_t>(std::llround(acc));
}

namespace {

double choose(Count n, Count r) {
    if (r < 0 || r > n) return 0.0;
    r = std::min(r, n - r);
    double acc = 1.0;
    for (Count i = 1; i <= r; ++i) acc = acc * static_cast<double>(n - r + i) / static_cast<double>(i);
    return acc;
}

void guard(const ColorConfiguration& config, const OracleLimits& limits) {
    if (config.n() > limits.max_n)
        throw CapacityError("oracle limited to n <= " + std::to_string(limits.max_n));
    if (config.k() > limits.max_k)
        throw CapacityError("oracle limited to k <= " + std::to_string(limits.max_k));
    if (configuration_space_size(config.n(), config.k()) > limits.max_states)
        throw CapacityError("configuration space exceeds the oracle state limit");
}

using Law = std::map<StateKey, double>;

Law convolve(const Law& acc, const Law& part) {
    Law out;
    for (const auto& [a, pa] : acc) {
        for (const auto& [b, pb] : part) {
            StateKey sum(a.size());
            for (std::size_t i = 0; i < a.size(); ++i) sum[i] = a[i] + b[i];
            out[sum] += pa * pb;
        }
    }
    return out;
}

/// Visits every way of splitting `total` into `cells.size()` parts.
template <class Fn>
void for_each_composition(Count total, std::vector<Count>& cells, std::size_t at, Fn&& fn) {
    if (at + 1 == cells.size()) {
        cells[at] = total;
        fn(cells);
        return;
    }
    for (Count v = 0; v <= total; ++v) {
        cells[at] = v;
        for_each_composition(total - v, cells, at + 1, fn);
    }
}

} // namespace

ConfigDistribution exact_step_distribution(const ColorConfiguration& config,
                                           const OracleLimits& limits) {
    guard(config, limits);
    const StateKey start = state_key(config);
    const std::size_t k = start.size() - 1;
    const Count n = config.n();
    const Count q = start.back();

    ConfigDistribution dist;
    dist.k = k;
    dist.n = n;
    if (n == 0) {
        dist.probs[start] = 1.0;
        return dist;
    }
    const double nn = static_cast<double>(n);

    Law acc{{StateKey(k + 1, 0), 1.0}};

    // Color community i: Binomial(c_i, (c_i + q)/n) keep their color, the
    // rest become undecided.
    for (std::size_t i = 0; i < k; ++i) {
        const Count ci = start[i];
        if (ci == 0) continue;
        const double keep = static_cast<double>(ci + q) / nn;
        Law part;
        for (Count s = 0; s <= ci; ++s) {
            const double p = choose(ci, s) * std::pow(keep, static_cast<double>(s)) *
                             std::pow(1.0 - keep, static_cast<double>(ci - s));
            if (p == 0.0) continue;
            StateKey delta(k + 1, 0);
            delta[i] = s;
            delta[k] = ci - s;
            part[delta] += p;
        }
        acc = convolve(acc, part);
    }

    // Undecided community: multinomial over what each agent sees.
    if (q > 0) {
        Law part;
        std::vector<Count> cells(k + 1, 0);
        for_each_composition(q, cells, 0, [&](const std::vector<Count>& split) {
            double p = 1.0;
            Count left = q;
            for (std::size_t j = 0; j <= k && p > 0.0; ++j) {
                const double pj = static_cast<double>(start[j]) / nn;
                p *= choose(left, split[j]) * std::pow(pj, static_cast<double>(split[j]));
                left -= split[j];
            }
            if (p > 0.0) part[split] += p;
        });
        acc = convolve(acc, part);
    }

    dist.probs = std::move(acc);
    return dist;
}

ConfigDistribution enumerate_step_distribution(const ColorConfiguration& config) {
    if (config.n() > 6) throw CapacityError("per-agent enumeration limited to n <= 6");
    const AgentStates agents = agents_from_config(config);
    const std::size_t n = agents.size();
    ConfigDistribution dist;
    dist.k = config.by_label().size();
    dist.n = config.n();
    if (n == 0) {
        dist.probs[state_key(config)] = 1.0;
        return dist;
    }

    std::size_t outcomes = 1;
    for (std::size_t i = 0; i < n; ++i) outcomes *= n;
    const double weight = 1.0 / static_cast<double>(outcomes);

    std::vector<std::size_t> target(n, 0);
    for (std::size_t code = 0; code < outcomes; ++code) {
        std::size_t rest = code;
        for (std::size_t u = 0; u < n; ++u) {
            target[u] = rest % n;
            rest /= n;
        }
        StateKey key(dist.k + 1, 0);
        for (std::size_t u = 0; u < n; ++u) {
            const ColorLabel next = update_rule(agents.state[u], agents.state[target[u]]);
            if (next == kUndecided) {
                ++key[dist.k];
            } else {
                ++key[next - 1];
            }
        }
        dist.probs[key] += weight;
    }
    return dist;
}

double AbsorptionReport::color_wins(ColorLabel label) const {
    for (const auto& [key, p] : absorption) {
        if (key.back() != 0 || label == 0 || label > k) continue;
        if (key[label - 1] == n) return p;
    }
    return 0.0;
}

double AbsorptionReport::all_undecided() const {
    for (const auto& [key, p] : absorption)
        if (key.back() == n) return p;
    return 0.0;
}

double AbsorptionReport::total() const {
    double sum = 0.0;
    for (const auto& [key, p] : absorption) sum += p;
    return sum;
}

AbsorptionReport exact_absorption(const ColorConfiguration& config,
                                  std::optional<std::uint64_t> horizon,
                                  const OracleLimits& limits) {
    guard(config, limits);
    const StateKey start = state_key(config);

    AbsorptionReport report;
    report.k = start.size() - 1;
    report.n = config.n();
    report.horizon = horizon;

    // Breadth-first exploration of the reachable chain.
    std::map<StateKey, std::size_t> index;
    std::vector<StateKey> states;
    std::vector<std::vector<std::pair<std::size_t, double>>> rows;
    std::vector<bool> absorbing;
    std::deque<std::size_t> frontier;

    auto intern = [&](const StateKey& key) {
        auto [it, fresh] = index.emplace(key, states.size());
        if (fresh) {
            if (states.size() >= limits.max_states)
                throw CapacityError("reachable state space exceeds the oracle state limit");
            states.push_back(key);
            absorbing.push_back(config_from_key(key).is_absorbing());
            rows.emplace_back();
            frontier.push_back(it->second);
        }
        return it->second;
    };
    intern(start);
    while (!frontier.empty()) {
        const std::size_t s = frontier.front();
        frontier.pop_front();
        if (absorbing[s]) continue;
        const auto next = exact_step_distribution(config_from_key(states[s]), limits);
        std::vector<std::pair<std::size_t, double>> row;
        for (const auto& [key, p] : next.probs) row.emplace_back(intern(key), p);
        rows[s] = std::move(row);
    }
    report.reachable_states = states.size();

    if (absorbing[0]) {
        report.absorption[start] = 1.0;
        return report;
    }

    std::vector<std::size_t> transient;
    std::vector<std::size_t> absorbers;
    std::vector<std::size_t> slot(states.size());
    for (std::size_t s = 0; s < states.size(); ++s) {
        if (absorbing[s]) {
            slot[s] = absorbers.size();
            absorbers.push_back(s);
        } else {
            slot[s] = transient.size();
            transient.push_back(s);
        }
    }

    if (!horizon) {
        if (transient.size() > limits.max_solve_states)
            throw CapacityError("transient space too large for the exact solve; pass a horizon");
        const auto t = static_cast<Eigen::Index>(transient.size());
        const auto a = static_cast<Eigen::Index>(absorbers.size());
        Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(t, t);
        Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(t, a + 1);
        for (std::size_t i = 0; i < transient.size(); ++i) {
            const auto row = static_cast<Eigen::Index>(i);
            for (const auto& [to, p] : rows[transient[i]]) {
                const auto col = static_cast<Eigen::Index>(slot[to]);
                if (absorbing[to]) {
                    rhs(row, col) += p;
                } else {
                    lhs(row, col) -= p;
                }
            }
            rhs(row, a) = 1.0; // expected-time column
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(lhs);
        if (!lu.isInvertible()) throw NumericError("absorbing-chain system is singular");
        const Eigen::MatrixXd sol = lu.solve(rhs);
        const auto origin = static_cast<Eigen::Index>(slot[0]);
        for (std::size_t j = 0; j < absorbers.size(); ++j) {
            const double p = sol(origin, static_cast<Eigen::Index>(j));
            if (p != 0.0) report.absorption[states[absorbers[j]]] = p;
        }
        report.expected_time = sol(origin, a);
        return report;
    }

    std::vector<double> mass(states.size(), 0.0);
    std::vector<double> next(states.size(), 0.0);
    mass[0] = 1.0;
    double alive = 1.0;
    double expected = 0.0;
    for (std::uint64_t r = 0; r < *horizon && alive > 0.0; ++r) {
        expected += alive;
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t s = 0; s < states.size(); ++s) {
            if (mass[s] == 0.0) continue;
            if (absorbing[s]) {
                next[s] += mass[s];
                continue;
            }
            for (const auto& [to, p] : rows[s]) next[to] += mass[s] * p;
        }
        mass.swap(next);
        alive = 0.0;
        for (std::size_t s : transient) alive += mass[s];
    }
    for (std::size_t s : absorbers)
        if (mass[s] != 0.0) report.absorption[states[s]] = mass[s];
    report.expected_time = expected;
    report.residual = alive;
    return report;
}

double total_variation(const ConfigDistribution& exact, const std::map<StateKey, double>& empirical) {
    double sum = 0.0;
    for (const auto& [key, p] : exact.probs) {
        auto it = empirical.find(key);
        sum += std::abs(p - (it == empirical.end() ? 0.0 : it->second));
    }
    for (const auto& [key, p] : empirical)
        if (!exact.probs.contains(key)) sum += std::abs(p);
    return 0.5 * sum;
}

namespace {

nlohmann::json key_json(const StateKey& key) {
    return nlohmann::json{{"counts", std::vector<Count>(key.begin(), key.end() - 1)}, {"q", key.back()}};
}

} // namespace

nlohmann::json to_json(const ConfigDistribution& dist) {
    nlohmann::json out{{"n", dist.n}, {"k", dist.k}};
    auto& outcomes = out["outcomes"] = nlohmann::json::array();
    for (const auto& [key, p] : dist.probs) {
        auto entry = key_json(key);
        entry["p"] = p;
        outcomes.push_back(std::move(entry));
    }
    return out;
}

nlohmann::json to_json(const AbsorptionReport& report) {
    nlohmann::json out{{"n", report.n},
                       {"k", report.k},
                       {"expected_time", report.expected_time},
                       {"residual", report.residual},
                       {"reachable_states", report.reachable_states}};
    out["horizon"] = report.horizon ? nlohmann::json(*report.horizon) : nlohmann::json(nullptr);
    out["method"] = report.horizon ? "truncated_iteration" : "linear_solve";
    auto& list = out["absorption"] = nlohmann::json::array();
    for (const auto& [key, p] : report.absorption) {
        auto entry = key_json(key);
        entry["p"] = p;
        if (key.back() == report.n) {
            entry["kind"] = "all_undecided";
        } else {
            entry["kind"] = "monochromatic";
            for (std::size_t i = 0; i + 1 < key.size(); ++i)
                if (key[i] != 0) entry["label"] = i + 1;
        }
        list.push_back(std::move(entry));
    }
    return out;
}

} // namespace usd
