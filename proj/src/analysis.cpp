#include "usdlab/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "usdlab/errors.hpp"

namespace usd {

std::optional<std::uint64_t> PhaseBoundaries::plateau_length() const {
    if (!age_of_undecided_end || !plateau_end) return std::nullopt;
    return *plateau_end - *age_of_undecided_end;
}

PhaseBoundaries detect_phases(const RunTrace& trace, const PhaseThresholds& thresholds) {
    if (trace.rows.empty()) throw AnalysisError("trace has no rows");
    PhaseBoundaries out;
    out.convergence_round = trace.convergence_round;

    if (trace.convergence_round && *trace.convergence_round == 0) {
        out.first_round_end = out.age_of_undecided_end = out.plateau_end = 0;
        out.plateau_precondition_met = true;
        return out;
    }
    const bool has_round_one = std::any_of(trace.rows.begin(), trace.rows.end(),
                                           [](const TraceRow& r) { return r.round == 1; });
    if (!has_round_one) throw AnalysisError("trace lacks the round-1 row");
    if (trace.initial.plurality() == 0) throw AnalysisError("initial configuration has no colored agent");

    const double n = static_cast<double>(trace.initial.n());
    const double md0 = md(trace.initial);
    const double undecided_line = n / 2.0 + thresholds.eps_tilde * n;
    const double plateau_line = 2.0 * thresholds.gamma * n / md0;
    out.first_round_end = 1;

    for (const auto& row : trace.rows) {
        if (row.round < 1) continue;
        const double q = static_cast<double>(row.q);
        const double c1 = static_cast<double>(row.c1);
        if (!out.age_of_undecided_end) {
            if (q < undecided_line) {
                out.age_of_undecided_end = row.round;
                out.plateau_precondition_met =
                    std::abs(q - n / 2.0) <= 2.0 * thresholds.gamma * thresholds.gamma * n / md0 &&
                    c1 <= thresholds.gamma * n / md0;
            } else {
                continue;
            }
        }
        if (c1 > plateau_line) {
            out.plateau_end = row.round;
            break;
        }
    }
    // With a small md the crossing line can exceed n; a decided run then
    // leaves the plateau when it converges.
    if (out.age_of_undecided_end && !out.plateau_end && trace.convergence_round &&
        trace.outcome != Outcome::all_undecided_stall)
        out.plateau_end = trace.convergence_round;
    return out;
}

namespace {

nlohmann::json opt(const std::optional<std::uint64_t>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

} // namespace

nlohmann::json to_json(const PhaseBoundaries& p) {
    return nlohmann::json{{"first_round_end", opt(p.first_round_end)},
                          {"age_of_undecided_end", opt(p.age_of_undecided_end)},
                          {"plateau_end", opt(p.plateau_end)},
                          {"convergence_round", opt(p.convergence_round)},
                          {"plateau_length", opt(p.plateau_length())},
                          {"plateau_precondition_met", p.plateau_precondition_met}};
}

std::uint64_t plateau_persistence(double md0, double gamma) {
    return static_cast<std::uint64_t>(std::floor(md0 / (4.0 * gamma * (1.0 + gamma))));
}

MonotonicityReport check_monotonicity(const RunTrace& trace, const MonotonicityParams& params) {
    MonotonicityReport report;
    const double n = static_cast<double>(trace.initial.n());
    if (n <= 1.0) return report;
    const double ln_n = std::log(n);
    for (std::size_t i = 0; i + 1 < trace.rows.size(); ++i) {
        const auto& now = trace.rows[i];
        const auto& next = trace.rows[i + 1];
        if (next.round != now.round + 1 || !now.r || !next.r) continue;
        const double c1 = static_cast<double>(now.c1);
        const double mu1 = c1 * (c1 + 2.0 * static_cast<double>(now.q)) / n;
        if (mu1 < params.lambda * ln_n) continue;
        ++report.eligible;
        if (*next.r > *now.r * (1.0 + params.kappa * std::sqrt(ln_n / mu1))) {
            ++report.violations;
            report.violation_rounds.push_back(now.round);
        }
    }
    report.insufficient_data = report.eligible == 0;
    return report;
}

nlohmann::json to_json(const MonotonicityReport& r) {
    return nlohmann::json{{"eligible", r.eligible},
                          {"violations", r.violations},
                          {"violation_fraction", r.violation_fraction()},
                          {"violation_rounds", r.violation_rounds},
                          {"insufficient_data", r.insufficient_data}};
}

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) return std::nullopt;
    const double m = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= m;
    my /= m;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0 || !std::isfinite(sxy)) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

namespace {

struct RunRecord {
    Outcome outcome = Outcome::timeout;
    std::optional<std::uint64_t> rounds;
    std::optional<std::uint64_t> plateau;
    bool precondition = false;
};

} // namespace

SweepResult sweep_md(const std::vector<InitSpec>& family, const std::vector<std::uint64_t>& seeds,
                     const SweepParams& params) {
    if (family.empty()) throw ValidationError("sweep family is empty");
    if (seeds.empty()) throw ValidationError("sweep needs at least one seed");
    validate(params.run);

    std::vector<ColorConfiguration> starts;
    starts.reserve(family.size());
    for (const auto& spec : family) {
        Rng unused(0);
        starts.push_back(generate_initial(spec, unused));
        if (starts.back().n() != starts.front().n())
            throw SpecError("sweep family members must share n");
    }

    RunParams run_params = params.run;
    run_params.record_every = 1;

    const std::size_t tasks = family.size() * seeds.size();
    std::vector<RunRecord> records(tasks);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_lock;

    auto worker = [&] {
        for (std::size_t t = next++; t < tasks; t = next++) {
            try {
                const std::size_t s = t / seeds.size();
                const std::size_t i = t % seeds.size();
                RunParams rp = run_params;
                rp.seed = seeds[i];
                Rng rng(seeds[i]);
                const auto trace = run(starts[s], rp, rng);
                RunRecord rec;
                rec.outcome = trace.outcome;
                rec.rounds = trace.convergence_round;
                const auto phases = detect_phases(trace, params.thresholds);
                rec.plateau = phases.plateau_length();
                rec.precondition = phases.plateau_precondition_met;
                records[t] = rec;
            } catch (...) {
                std::lock_guard lock(failure_lock);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min(params.workers, tasks));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    SweepResult result;
    result.n = starts.front().n();
    const double ln_n = std::log(static_cast<double>(result.n));
    std::vector<double> md_log_n;
    std::vector<double> means;
    std::vector<double> mds;
    std::vector<double> plateaus;
    for (std::size_t s = 0; s < family.size(); ++s) {
        SweepRow row;
        row.spec = family[s];
        row.md0 = md(starts[s]);
        row.r0 = big_r(starts[s]);
        row.runs = seeds.size();
        std::vector<double> rounds;
        double plateau_sum = 0.0;
        std::size_t plateau_count = 0;
        std::size_t stalls = 0;
        std::size_t wins = 0;
        std::size_t timeouts = 0;
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            const auto& rec = records[s * seeds.size() + i];
            if (rec.rounds) rounds.push_back(static_cast<double>(*rec.rounds));
            if (rec.plateau) {
                plateau_sum += static_cast<double>(*rec.plateau);
                ++plateau_count;
            }
            if (!rec.precondition) ++row.plateau_flagged;
            if (rec.outcome == Outcome::all_undecided_stall) ++stalls;
            if (rec.outcome == Outcome::plurality_win) ++wins;
            if (rec.outcome == Outcome::timeout) ++timeouts;
        }
        const double runs = static_cast<double>(row.runs);
        row.stall_frequency = static_cast<double>(stalls) / runs;
        row.win_frequency = static_cast<double>(wins) / runs;
        row.timeout_frequency = static_cast<double>(timeouts) / runs;
        if (!rounds.empty()) {
            double sum = 0.0;
            for (double r : rounds) sum += r;
            row.mean_rounds = sum / static_cast<double>(rounds.size());
            double var = 0.0;
            for (double r : rounds) var += (r - row.mean_rounds) * (r - row.mean_rounds);
            row.std_rounds = rounds.size() > 1 ? std::sqrt(var / static_cast<double>(rounds.size() - 1)) : 0.0;
        } else {
            row.mean_rounds = row.std_rounds = std::nan("");
        }
        row.plateau_mean = plateau_count > 0 ? plateau_sum / static_cast<double>(plateau_count) : std::nan("");
        md_log_n.push_back(row.md0 * ln_n);
        means.push_back(row.mean_rounds);
        mds.push_back(row.md0);
        plateaus.push_back(row.plateau_mean);
        result.rows.push_back(std::move(row));
    }
    result.time_vs_md_log_n = pearson(means, md_log_n);
    result.plateau_vs_md = pearson(plateaus, mds);
    return result;
}

std::string sweep_csv(const SweepResult& result) {
    std::ostringstream os;
    os << "kind,n,k,elite,alpha,md0,R0,runs,mean_rounds,std_rounds,plateau_mean,plateau_flagged,"
          "stall_frequency,win_frequency,timeout_frequency\n";
    for (const auto& r : result.rows) {
        os << to_string(r.spec.kind) << ',' << result.n << ',' << r.spec.k << ',' << r.spec.elite << ','
           << format_double(r.spec.alpha) << ',' << format_double(r.md0) << ',' << format_double(r.r0) << ','
           << r.runs << ',' << format_double(r.mean_rounds) << ',' << format_double(r.std_rounds) << ','
           << format_double(r.plateau_mean) << ',' << r.plateau_flagged << ',' << format_double(r.stall_frequency)
           << ',' << format_double(r.win_frequency) << ',' << format_double(r.timeout_frequency) << '\n';
    }
    return os.str();
}

nlohmann::json fit_json(const SweepResult& result) {
    auto corr = [](const std::optional<double>& v) {
        return v ? nlohmann::json(*v) : nlohmann::json("undefined");
    };
    return nlohmann::json{{"n", result.n},
                          {"pearson_time_vs_md_log_n", corr(result.time_vs_md_log_n)},
                          {"pearson_plateau_vs_md", corr(result.plateau_vs_md)}};
}

std::vector<InitSpec> md_ladder(Count n, double alpha, const std::vector<double>& targets, std::size_t max_k) {
    struct Candidate {
        InitSpec spec;
        double md;
    };
    std::vector<Candidate> pool;
    Rng unused(0);
    for (std::size_t k = 2; k <= max_k && static_cast<Count>(k) <= n; ++k) {
        for (std::size_t elite = 1; elite <= k; ++elite) {
            InitSpec spec;
            spec.n = n;
            spec.k = k;
            spec.alpha = alpha;
            if (elite == k) {
                spec.kind = InitKind::uniform;
            } else {
                spec.kind = InitKind::oligarchic;
                spec.elite = elite;
            }
            try {
                pool.push_back({spec, md(generate_initial(spec, unused))});
            } catch (const SpecError&) {
            }
        }
    }
    if (pool.empty()) throw SpecError("no feasible configuration for the md ladder");
    std::vector<InitSpec> out;
    for (double target : targets) {
        const Candidate* best = &pool.front();
        for (const auto& c : pool)
            if (std::abs(c.md - target) < std::abs(best->md - target)) best = &c;
        out.push_back(best->spec);
    }
    return out;
}

} // namespace usd
