#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "json.hpp"

#include "usdlab/complete.hpp"
#include "usdlab/config.hpp"
#include "usdlab/trace.hpp"

namespace usd {

/// Round indices where each stage of a run ends; absent if never reached.
struct PhaseBoundaries {
    std::optional<std::uint64_t> first_round_end;
    /// First round >= 1 with q < n/2 + eps_tilde * n.
    std::optional<std::uint64_t> age_of_undecided_end;
    /// First round >= age_of_undecided_end with c_1 > 2 gamma n / md(c0).
    std::optional<std::uint64_t> plateau_end;
    std::optional<std::uint64_t> convergence_round;
    /// At age_of_undecided_end: |q - n/2| <= 2 gamma^2 n / md(c0) and
    /// c_1 <= gamma n / md(c0).
    bool plateau_precondition_met = false;

    std::optional<std::uint64_t> plateau_length() const;
};

struct PhaseThresholds {
    double gamma = 4.0;
    double eps_tilde = 0.05;
};

PhaseBoundaries detect_phases(const RunTrace& trace, const PhaseThresholds& thresholds = {});

nlohmann::json to_json(const PhaseBoundaries& phases);

/// floor(md / (4 gamma (1 + gamma))): rounds the plurality is expected to
/// stay below 2 gamma n / md once the plateau starts.
std::uint64_t plateau_persistence(double md0, double gamma);

struct MonotonicityReport {
    std::size_t eligible = 0;
    std::size_t violations = 0;
    std::vector<std::uint64_t> violation_rounds;
    bool insufficient_data = true;

    double violation_fraction() const {
        return eligible == 0 ? 0.0 : static_cast<double>(violations) / static_cast<double>(eligible);
    }
};

struct MonotonicityParams {
    /// A step is audited when mu_1 >= lambda * ln n.
    double lambda = 1.0;
    /// Slack on the growth of R.
    double kappa = 10.0;
};

/// Audits R(t+1) <= R(t) (1 + kappa sqrt(ln n / mu_1)) over consecutive
/// recorded rounds.
MonotonicityReport check_monotonicity(const RunTrace& trace, const MonotonicityParams& params = {});

nlohmann::json to_json(const MonotonicityReport& report);

/// Pearson correlation; absent when either series has zero variance or the
/// series are shorter than 2.
std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y);

struct SweepRow {
    InitSpec spec;
    double md0 = 0.0;
    double r0 = 0.0;
    std::size_t runs = 0;
    /// Over runs that reached an absorbing state.
    double mean_rounds = 0.0;
    double std_rounds = 0.0;
    double plateau_mean = 0.0;
    std::size_t plateau_flagged = 0;
    double stall_frequency = 0.0;
    double win_frequency = 0.0;
    double timeout_frequency = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    Count n = 0;
    /// Correlation of mean rounds against md * ln n.
    std::optional<double> time_vs_md_log_n;
    /// Correlation of mean plateau length against md.
    std::optional<double> plateau_vs_md;
};

struct SweepParams {
    RunParams run;
    PhaseThresholds thresholds;
    std::size_t workers = 1;
};

/// Runs every (spec, seed) pair and aggregates. Every spec is run with the
/// same seed list (common random numbers), so identical specs give
/// identical rows. Runs are recorded every round for phase detection.
SweepResult sweep_md(const std::vector<InitSpec>& family, const std::vector<std::uint64_t>& seeds,
                     const SweepParams& params);

std::string sweep_csv(const SweepResult& result);
nlohmann::json fit_json(const SweepResult& result);

/// One oligarchic-to-uniform spec per target md: for each target the
/// (k, elite) pair with the closest generated md, k <= max_k.
std::vector<InitSpec> md_ladder(Count n, double alpha, const std::vector<double>& targets,
                                std::size_t max_k = 90);

} // namespace usd
