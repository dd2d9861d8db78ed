#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "usdlab/rng.hpp"

namespace usd {

using Count = std::int64_t;
/// Colors are labelled 1..k as supplied by the caller; 0 is reserved for
/// "undecided" wherever a single integer encodes an agent state.
using ColorLabel = std::uint32_t;
inline constexpr ColorLabel kUndecided = 0;

/// Counts per color plus the undecided community: the Markov-chain state.
///
/// Counts are kept in non-increasing order. `labels()[i]` is the caller's
/// label of the color whose count sits at position i, so the original
/// coloring can always be recovered with `by_label()`. Ties keep the order
/// they had on input (stable).
class ColorConfiguration {
public:
    ColorConfiguration() = default;

    /// Builds a configuration from per-position counts with explicit labels,
    /// re-sorting stably. Validates non-negativity, label uniqueness, and
    /// overflow of the total.
    static ColorConfiguration with_labels(std::vector<Count> counts,
                                          std::vector<ColorLabel> labels,
                                          Count undecided);

    const std::vector<Count>& counts() const noexcept { return counts_; }
    const std::vector<ColorLabel>& labels() const noexcept { return labels_; }
    Count undecided() const noexcept { return undecided_; }
    Count n() const noexcept { return n_; }
    std::size_t k() const noexcept { return counts_.size(); }

    Count plurality() const noexcept { return counts_.front(); }
    ColorLabel plurality_label() const noexcept { return labels_.front(); }
    Count decided() const noexcept { return n_ - undecided_; }

    /// Counts indexed by label - 1.
    std::vector<Count> by_label() const;

    /// Exactly one color is present and nobody is undecided.
    bool is_monochromatic() const noexcept;
    bool is_all_undecided() const noexcept { return undecided_ == n_; }
    bool is_absorbing() const noexcept { return is_monochromatic() || is_all_undecided(); }

    friend bool operator==(const ColorConfiguration&, const ColorConfiguration&) = default;

private:
    std::vector<Count> counts_;
    std::vector<ColorLabel> labels_;
    Count undecided_ = 0;
    Count n_ = 0;
};

/// Labels are assigned 1..k in input order, then counts are sorted.
ColorConfiguration make_config(std::span<const Count> raw_counts, Count undecided);
ColorConfiguration make_config(std::initializer_list<Count> raw_counts, Count undecided);

// Global-bias metrics. All throw MetricError when the plurality count is 0.

/// Monochromatic distance: sum of (c_i / c_1)^2.
double md(const ColorConfiguration& config);
/// Sum of c_i / c_1, i.e. (n - q) / c_1.
double big_r(const ColorConfiguration& config);
/// big_r^2 / md.
double rr(const ColorConfiguration& config);

/// One-round expectation of every community, in the position order of
/// `config.counts()`.
struct ExpectedStep {
    std::vector<double> mu;
    double mu_q = 0.0;
};

ExpectedStep expected_next(const ColorConfiguration& config);

/// Lower bound on the expected growth of (C_1 + 2Q)/n. `valid` is cleared
/// when c_1 >= (1+alpha) c_i fails for some i != 1, in which case `value`
/// is still the closed-form number but carries no guarantee.
struct GammaDrift {
    double value = 0.0;
    bool valid = false;
};

GammaDrift gamma_drift(const ColorConfiguration& config, double alpha);

/// True when c_1 >= (1+alpha) c_i for every i != 1.
bool has_bias(const ColorConfiguration& config, double alpha);

enum class InitKind { uniform, oligarchic, figure2, custom };

/// Recipe for an initial configuration (always q = 0).
///
///  - uniform:    weights (1+alpha, 1, ..., 1) over k colors.
///  - oligarchic: the first `elite` colors weigh sqrt(k) (the plurality
///                (1+alpha) sqrt(k)); the rest weigh 1.
///  - figure2:    c_1 = 2n/k, c_i = (n/k)(1 - 2/k).
///  - custom:     explicit `counts`.
///
/// Non-plurality counts are floored; whatever is left goes to color 1.
struct InitSpec {
    InitKind kind = InitKind::uniform;
    Count n = 0;
    std::size_t k = 1;
    double alpha = 0.0;
    std::size_t elite = 1;
    std::vector<Count> counts;

    friend bool operator==(const InitSpec&, const InitSpec&) = default;
};

ColorConfiguration generate_initial(const InitSpec& spec, Rng& rng);

std::string to_string(InitKind kind);
InitKind init_kind_from_string(const std::string& name);

void to_json(nlohmann::json& j, const ColorConfiguration& config);
void from_json(const nlohmann::json& j, ColorConfiguration& config);
void to_json(nlohmann::json& j, const InitSpec& spec);
void from_json(const nlohmann::json& j, InitSpec& spec);

} // namespace usd
