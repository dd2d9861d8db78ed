#include "usdlab/trace.hpp"

#include <charconv>
#include <ostream>
#include <sstream>

namespace usd {

std::string to_string(Outcome outcome) {
    switch (outcome) {
    case Outcome::plurality_win: return "PluralityWin";
    case Outcome::other_win: return "OtherWin";
    case Outcome::all_undecided_stall: return "AllUndecidedStall";
    case Outcome::timeout: return "Timeout";
    }
    return "?";
}

TraceRow make_row(std::uint64_t round, const ColorConfiguration& config, double alpha_hint) {
    TraceRow row;
    row.round = round;
    row.q = config.undecided();
    const auto& c = config.counts();
    row.c1 = c.front();
    row.c2 = c.size() > 1 ? c[1] : 0;
    row.ck = c.back();
    if (row.c1 > 0) {
        row.r = big_r(config);
        row.md = md(config);
        if (alpha_hint > 0.0) {
            const auto drift = gamma_drift(config, alpha_hint);
            row.gamma_valid = drift.valid;
            if (drift.valid) row.gamma = drift.value;
        }
    }
    return row;
}

std::optional<Outcome> classify(const ColorConfiguration& initial, const ColorConfiguration& current,
                                std::optional<ColorLabel>& winner) {
    if (current.is_monochromatic()) {
        winner = current.plurality_label();
        return *winner == initial.plurality_label() ? Outcome::plurality_win : Outcome::other_win;
    }
    if (current.is_all_undecided()) {
        winner.reset();
        return Outcome::all_undecided_stall;
    }
    return std::nullopt;
}

std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, end);
}

namespace {

void put_optional(std::ostream& out, const std::optional<double>& v) {
    if (v) out << format_double(*v);
}

} // namespace

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
    out << kTraceCsvHeader << '\n';
    for (const auto& row : trace.rows) {
        out << row.round << ',' << row.q << ',' << row.c1 << ',' << row.c2 << ',' << row.ck << ',';
        put_optional(out, row.r);
        out << ',';
        put_optional(out, row.md);
        out << ',' << (row.gamma_valid ? 1 : 0) << ',';
        put_optional(out, row.gamma);
        out << '\n';
    }
}

std::string trace_csv(const RunTrace& trace) {
    std::ostringstream os;
    write_trace_csv(os, trace);
    return os.str();
}

nlohmann::json summary_json(const RunTrace& trace) {
    nlohmann::json j;
    j["outcome"] = to_string(trace.outcome);
    j["convergence_round"] = trace.convergence_round ? nlohmann::json(*trace.convergence_round)
                                                     : nlohmann::json(nullptr);
    if (trace.initial.plurality() > 0) {
        j["md0"] = md(trace.initial);
        j["R0"] = big_r(trace.initial);
        j["rr0"] = rr(trace.initial);
    } else {
        j["md0"] = j["R0"] = j["rr0"] = nullptr;
    }
    j["seed"] = trace.seed;
    j["winner_label"] = trace.winner ? nlohmann::json(*trace.winner) : nlohmann::json(nullptr);
    j["n"] = trace.initial.n();
    j["k"] = trace.initial.k();
    return j;
}

} // namespace usd
