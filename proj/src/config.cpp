#include "usdlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "usdlab/errors.hpp"

namespace usd {

namespace {

Count checked_total(std::span<const Count> counts, Count undecided) {
    Count total = undecided;
    for (Count c : counts) {
        if (__builtin_add_overflow(total, c, &total))
            throw ValidationError("agent count overflow");
    }
    return total;
}

void require_metric_defined(const ColorConfiguration& config) {
    if (config.k() == 0 || config.plurality() == 0)
        throw MetricError("metric undefined: no colored agent (c_1 = 0)");
}

} // namespace

ColorConfiguration ColorConfiguration::with_labels(std::vector<Count> counts,
                                                   std::vector<ColorLabel> labels,
                                                   Count undecided) {
    if (counts.empty()) throw ValidationError("configuration needs at least one color");
    if (counts.size() != labels.size())
        throw ValidationError("counts and labels differ in length");
    if (undecided < 0) throw ValidationError("undecided count is negative");
    for (Count c : counts)
        if (c < 0) throw ValidationError("color count is negative");
    {
        auto sorted = labels;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() || sorted.front() == kUndecided)
            throw ValidationError("color labels must be distinct and non-zero");
    }

    ColorConfiguration out;
    out.n_ = checked_total(counts, undecided);
    out.undecided_ = undecided;

    // Canonical order: count descending, label ascending among ties.
    std::vector<std::size_t> order(counts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (counts[a] != counts[b]) return counts[a] > counts[b];
        return labels[a] < labels[b];
    });
    out.counts_.reserve(counts.size());
    out.labels_.reserve(counts.size());
    for (std::size_t i : order) {
        out.counts_.push_back(counts[i]);
        out.labels_.push_back(labels[i]);
    }
    return out;
}

std::vector<Count> ColorConfiguration::by_label() const {
    const ColorLabel max_label = *std::max_element(labels_.begin(), labels_.end());
    std::vector<Count> out(max_label, 0);
    for (std::size_t i = 0; i < counts_.size(); ++i) out[labels_[i] - 1] = counts_[i];
    return out;
}

bool ColorConfiguration::is_monochromatic() const noexcept {
    if (undecided_ != 0 || counts_.empty() || counts_.front() == 0) return false;
    return counts_.size() == 1 || counts_[1] == 0;
}

ColorConfiguration make_config(std::span<const Count> raw_counts, Count undecided) {
    std::vector<ColorLabel> labels(raw_counts.size());
    std::iota(labels.begin(), labels.end(), ColorLabel{1});
    return ColorConfiguration::with_labels(
        std::vector<Count>(raw_counts.begin(), raw_counts.end()), std::move(labels), undecided);
}

ColorConfiguration make_config(std::initializer_list<Count> raw_counts, Count undecided) {
    return make_config(std::span<const Count>(raw_counts.begin(), raw_counts.size()), undecided);
}

double md(const ColorConfiguration& config) {
    require_metric_defined(config);
    const double c1 = static_cast<double>(config.plurality());
    double sum = 0.0;
    for (Count c : config.counts()) {
        const double ratio = static_cast<double>(c) / c1;
        sum += ratio * ratio;
    }
    return sum;
}

double big_r(const ColorConfiguration& config) {
    require_metric_defined(config);
    return static_cast<double>(config.decided()) / static_cast<double>(config.plurality());
}

double rr(const ColorConfiguration& config) {
    const double r = big_r(config);
    return r * r / md(config);
}

ExpectedStep expected_next(const ColorConfiguration& config) {
    if (config.n() <= 0) throw ValidationError("expectation needs n > 0");
    const double n = static_cast<double>(config.n());
    const double q = static_cast<double>(config.undecided());
    ExpectedStep out;
    out.mu.reserve(config.k());
    double sum_sq = 0.0;
    for (Count c : config.counts()) {
        const double ci = static_cast<double>(c);
        out.mu.push_back(ci * (ci + 2.0 * q) / n);
        sum_sq += ci * ci;
    }
    const double decided = n - q;
    out.mu_q = (q * q + decided * decided - sum_sq) / n;
    return out;
}

bool has_bias(const ColorConfiguration& config, double alpha) {
    if (config.k() < 2) return true;
    // alpha usually arrives as a decimal, so c_1 = (1+alpha) c_i exactly
    // must not be lost to rounding in alpha.
    const Count gap = config.counts()[0] - config.counts()[1];
    return static_cast<double>(gap) >= alpha * static_cast<double>(config.counts()[1]) * (1.0 - 1e-12);
}

GammaDrift gamma_drift(const ColorConfiguration& config, double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw ParameterError("gamma_drift needs alpha > 0");
    const double r = big_r(config);
    const double n = static_cast<double>(config.n());
    const double c1 = static_cast<double>(config.plurality());
    const double q = static_cast<double>(config.undecided());
    const double gamma = 1.0 / (1.0 + alpha);
    const double lead = 1.0 - (c1 + 2.0 * q) / n;
    const double share = c1 / n;
    return {lead * lead + 2.0 * (1.0 - gamma) * (r - 1.0) * share * share,
            has_bias(config, alpha)};
}

namespace {

/// Floors n * w_i / W for i >= 2 and hands the remainder to color 1.
std::vector<Count> apportion(Count n, const std::vector<double>& weights) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<Count> counts(weights.size(), 0);
    Count rest = 0;
    for (std::size_t i = 1; i < weights.size(); ++i) {
        counts[i] = static_cast<Count>(std::floor(static_cast<double>(n) * weights[i] / total));
        rest += counts[i];
    }
    counts[0] = n - rest;
    return counts;
}

} // namespace

ColorConfiguration generate_initial(const InitSpec& spec, Rng& /*rng*/) {
    if (!std::isfinite(spec.alpha) || spec.alpha < 0.0)
        throw SpecError("alpha must be a finite value >= 0");

    std::vector<Count> counts;
    if (spec.kind == InitKind::custom) {
        if (spec.counts.empty()) throw SpecError("custom spec needs counts");
        for (Count c : spec.counts)
            if (c < 0) throw SpecError("custom counts must be non-negative");
        counts = spec.counts;
        const Count total = checked_total(counts, 0);
        if (spec.n != 0 && spec.n != total)
            throw SpecError("custom counts sum to " + std::to_string(total) + ", not n = " +
                            std::to_string(spec.n));
    } else {
        if (spec.k < 1) throw SpecError("k must be >= 1");
        if (spec.n < static_cast<Count>(spec.k)) throw SpecError("need n >= k");
        const auto k = spec.k;
        switch (spec.kind) {
        case InitKind::uniform: {
            std::vector<double> w(k, 1.0);
            w[0] = 1.0 + spec.alpha;
            counts = apportion(spec.n, w);
            break;
        }
        case InitKind::oligarchic: {
            if (spec.elite < 1 || spec.elite > k)
                throw SpecError("elite size must lie in [1, k]");
            const double heavy = std::sqrt(static_cast<double>(k));
            std::vector<double> w(k, 1.0);
            for (std::size_t i = 0; i < spec.elite; ++i) w[i] = heavy;
            w[0] = (1.0 + spec.alpha) * heavy;
            counts = apportion(spec.n, w);
            break;
        }
        case InitKind::figure2: {
            if (k < 3) throw SpecError("figure2 needs k >= 3");
            counts.assign(k, 0);
            Count rest = 0;
            const Count kk = static_cast<Count>(k);
            // floor((n/k)(1 - 2/k)) = floor(n (k-2) / k^2), exact in integers.
            for (std::size_t i = 1; i < k; ++i) {
                counts[i] = spec.n * (kk - 2) / (kk * kk);
                rest += counts[i];
            }
            counts[0] = spec.n - rest;
            break;
        }
        case InitKind::custom:
            break;
        }
        if (std::find(counts.begin(), counts.end(), Count{0}) != counts.end())
            throw SpecError("alpha too large for n: some color would start empty");
    }

    auto config = make_config(counts, 0);
    if (spec.kind != InitKind::custom && config.plurality_label() != 1)
        throw SpecError("generated configuration lost its plurality color");
    if (spec.alpha > 0.0 && !has_bias(config, spec.alpha))
        throw SpecError("configuration does not satisfy the requested alpha-bias");
    return config;
}

std::string to_string(InitKind kind) {
    switch (kind) {
    case InitKind::uniform: return "uniform";
    case InitKind::oligarchic: return "oligarchic";
    case InitKind::figure2: return "figure2";
    case InitKind::custom: return "custom";
    }
    return "?";
}

InitKind init_kind_from_string(const std::string& name) {
    if (name == "uniform") return InitKind::uniform;
    if (name == "oligarchic") return InitKind::oligarchic;
    if (name == "figure2") return InitKind::figure2;
    if (name == "custom") return InitKind::custom;
    throw ValidationError("unknown init kind '" + name + "'");
}

void to_json(nlohmann::json& j, const ColorConfiguration& config) {
    j = nlohmann::json{{"counts", config.by_label()}, {"q", config.undecided()}};
}

void from_json(const nlohmann::json& j, ColorConfiguration& config) {
    if (!j.is_object() || !j.contains("counts"))
        throw ValidationError("configuration JSON needs a counts array");
    const auto counts = j.at("counts").get<std::vector<Count>>();
    config = make_config(counts, j.value("q", Count{0}));
}

void to_json(nlohmann::json& j, const InitSpec& spec) {
    j = nlohmann::json{{"kind", to_string(spec.kind)}, {"n", spec.n}, {"alpha", spec.alpha}};
    if (spec.kind == InitKind::custom) {
        j["counts"] = spec.counts;
    } else {
        j["k"] = spec.k;
    }
    if (spec.kind == InitKind::oligarchic) j["elite"] = spec.elite;
}

void from_json(const nlohmann::json& j, InitSpec& spec) {
    if (!j.is_object() || !j.contains("kind"))
        throw ValidationError("init spec JSON needs a \"kind\" discriminator");
    spec = InitSpec{};
    spec.kind = init_kind_from_string(j.at("kind").get<std::string>());
    spec.n = j.value("n", Count{0});
    spec.alpha = j.value("alpha", 0.0);
    if (spec.kind == InitKind::custom) {
        spec.counts = j.at("counts").get<std::vector<Count>>();
        spec.k = spec.counts.size();
    } else {
        spec.k = j.at("k").get<std::size_t>();
    }
    spec.elite = j.value("elite", std::size_t{1});
}

} // namespace usd
