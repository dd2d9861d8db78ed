#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "usdlab/config.hpp"

namespace usd {

enum class Outcome { plurality_win, other_win, all_undecided_stall, timeout };

std::string to_string(Outcome outcome);

/// One recorded round. Metrics are absent when c_1 = 0.
struct TraceRow {
    std::uint64_t round = 0;
    Count q = 0;
    Count c1 = 0;
    Count c2 = 0;
    Count ck = 0;
    std::optional<double> r;
    std::optional<double> md;
    bool gamma_valid = false;
    std::optional<double> gamma;

    friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

/// `alpha_hint <= 0` disables the drift column.
TraceRow make_row(std::uint64_t round, const ColorConfiguration& config, double alpha_hint);

struct RunTrace {
    ColorConfiguration initial;
    ColorConfiguration final_config;
    std::vector<TraceRow> rows;
    Outcome outcome = Outcome::timeout;
    std::optional<ColorLabel> winner;
    std::optional<std::uint64_t> convergence_round;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;

    friend bool operator==(const RunTrace&, const RunTrace&) = default;
};

/// Classifies an absorbing configuration relative to the initial plurality.
/// Returns nullopt for non-absorbing states.
std::optional<Outcome> classify(const ColorConfiguration& initial, const ColorConfiguration& current,
                                std::optional<ColorLabel>& winner);

inline constexpr const char* kTraceCsvHeader = "round,q,c1,c2,ck,R,md,gamma_valid,gamma";

void write_trace_csv(std::ostream& out, const RunTrace& trace);
std::string trace_csv(const RunTrace& trace);

/// {outcome, convergence_round, md0, R0, rr0, seed} plus the winner label.
nlohmann::json summary_json(const RunTrace& trace);

/// Shortest round-trip decimal form; used by every CSV writer.
std::string format_double(double value);

} // namespace usd
