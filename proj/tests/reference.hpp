#pragma once

// Reference computations written directly from the closed forms, kept apart
// from the library code they are used to check.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace ref {

using i128 = __int128;

struct Config {
    std::vector<std::int64_t> c; // any order
    std::int64_t q = 0;

    std::int64_t n() const { return std::accumulate(c.begin(), c.end(), q); }
    std::int64_t c1() const {
        std::int64_t m = 0;
        for (auto x : c) m = x > m ? x : m;
        return m;
    }
};

inline double md(const Config& x) {
    const double c1 = static_cast<double>(x.c1());
    double s = 0.0;
    for (auto ci : x.c) s += (ci / c1) * (ci / c1);
    return s;
}

inline double big_r(const Config& x) {
    return static_cast<double>(x.n() - x.q) / static_cast<double>(x.c1());
}

/// alpha = a / b. Bias: b c_1 >= (a + b) c_i for every other color.
inline bool biased(const Config& x, std::int64_t a, std::int64_t b) {
    const std::int64_t c1 = x.c1();
    bool skipped = false;
    for (auto ci : x.c) {
        if (ci == c1 && !skipped) {
            skipped = true;
            continue;
        }
        if (static_cast<i128>(b) * c1 < static_cast<i128>(a + b) * ci) return false;
    }
    return true;
}

/// Exact drift check in integers, alpha = a / b, after multiplying both
/// sides by n^2 (a + b):
///   (a+b)[c1(c1+2q) + 2(q^2 + (n-q)^2 - S2)]
///     >= (a+b)[n^2 + (n - c1 - 2q)^2] + 2a (n - q - c1) c1
inline i128 drift_slack(const Config& x, std::int64_t a, std::int64_t b) {
    const i128 n = x.n(), q = x.q, c1 = x.c1();
    i128 s2 = 0;
    for (auto ci : x.c) s2 += static_cast<i128>(ci) * ci;
    const i128 lhs = (a + b) * (c1 * (c1 + 2 * q) + 2 * (q * q + (n - q) * (n - q) - s2));
    const i128 rhs = (a + b) * (n * n + (n - c1 - 2 * q) * (n - c1 - 2 * q)) + 2 * a * (n - q - c1) * c1;
    return lhs - rhs;
}

/// One synchronous round, agent by agent, each agent pulling a uniformly
/// random agent (possibly itself). States: 0 undecided, 1..k colors.
template <class G>
std::vector<std::uint32_t> agent_round(const std::vector<std::uint32_t>& s, G& gen) {
    std::uniform_int_distribution<std::size_t> pick(0, s.size() - 1);
    std::vector<std::uint32_t> out(s.size());
    for (std::size_t u = 0; u < s.size(); ++u) {
        const auto seen = s[pick(gen)];
        if (s[u] == 0) out[u] = seen;
        else if (seen == 0 || seen == s[u]) out[u] = s[u];
        else out[u] = 0;
    }
    return out;
}

} // namespace ref
