#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "usdlab/errors.hpp"
#include "usdlab/experiment.hpp"

using nlohmann::json;

namespace {

struct Overrides {
    std::optional<std::string> config_file;
    std::optional<std::uint64_t> seed;
    std::optional<std::vector<std::uint64_t>> seeds;
    std::optional<std::string> out;

    std::optional<std::string> kind;
    std::optional<std::int64_t> n;
    std::optional<std::size_t> k;
    std::optional<double> alpha;
    std::optional<std::size_t> elite;
    std::optional<std::vector<std::int64_t>> counts;
    std::optional<std::int64_t> q;

    std::optional<std::uint64_t> max_rounds;
    std::optional<std::uint64_t> record_every;

    std::optional<std::size_t> degree;
    std::optional<std::uint64_t> max_phases;
    std::optional<double> eps;

    std::optional<std::uint64_t> horizon;
    bool no_absorption = false;

    std::optional<std::size_t> workers;
    std::optional<std::size_t> seed_count;
    std::optional<std::vector<double>> md_targets;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config_file, "JSON experiment file");
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--out", o.out, "output directory");
}

void add_init(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--kind", o.kind, "uniform | oligarchic | figure2 | custom");
    cmd->add_option("--n", o.n, "number of agents");
    cmd->add_option("--k", o.k, "number of colors");
    cmd->add_option("--alpha", o.alpha, "plurality bias");
    cmd->add_option("--elite", o.elite, "oligarchic elite size");
    cmd->add_option("--counts", o.counts, "custom color counts")->delimiter(',');
}

void add_run(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--max-rounds", o.max_rounds);
    cmd->add_option("--record-every", o.record_every);
}

template <class T>
void put(json& flags, const char* section, const char* key, const std::optional<T>& value) {
    if (!value) return;
    if (section) flags[section][key] = *value;
    else flags[key] = *value;
}

json build_flags(usd::Mode mode, const Overrides& o) {
    json f = json::object();
    put(f, nullptr, "seed", o.seed);
    put(f, nullptr, "seeds", o.seeds);
    put(f, nullptr, "out", o.out);
    if (mode == usd::Mode::oracle) {
        if (o.counts || o.q) {
            json& cfg = f["oracle"]["config"];
            if (o.counts) cfg["counts"] = *o.counts;
            if (o.q) cfg["q"] = *o.q;
        }
        put(f, "oracle", "horizon", o.horizon);
        if (o.no_absorption) f["oracle"]["absorption"] = false;
        return f;
    }
    put(f, "init", "kind", o.kind);
    put(f, "init", "n", o.n);
    put(f, "init", "k", o.k);
    put(f, "init", "alpha", o.alpha);
    put(f, "init", "elite", o.elite);
    if (o.counts) {
        f["init"]["counts"] = *o.counts;
        if (!o.kind) f["init"]["kind"] = "custom";
    }
    put(f, "run", "max_rounds", o.max_rounds);
    put(f, "run", "record_every", o.record_every);
    if (mode == usd::Mode::expander) {
        if (o.record_every) {
            f["expander"]["record_every"] = *o.record_every;
            f.erase("run");
        }
        put(f, "expander", "d", o.degree);
        put(f, "expander", "max_phases", o.max_phases);
        put(f, "expander", "eps", o.eps);
    }
    put(f, "sweep", "workers", o.workers);
    put(f, "sweep", "seed_count", o.seed_count);
    put(f, "sweep", "md_targets", o.md_targets);
    return f;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Undecided-state dynamics laboratory"};
    app.set_version_flag("--version", std::string(usd::kToolName) + " " + usd::kToolVersion);
    app.require_subcommand(1);

    Overrides o;

    auto* complete = app.add_subcommand("simulate-complete", "run the dynamics on the complete graph");
    add_common(complete, o);
    add_init(complete, o);
    add_run(complete, o);

    auto* expander = app.add_subcommand("simulate-expander", "run the token protocol on a random regular graph");
    add_common(expander, o);
    add_init(expander, o);
    expander->add_option("--d", o.degree, "graph degree");
    expander->add_option("--max-phases", o.max_phases);
    expander->add_option("--record-every", o.record_every);
    expander->add_option("--eps", o.eps, "mixing accuracy (default 1/n^2)");

    auto* oracle = app.add_subcommand("oracle", "exact one-step law and absorption probabilities");
    add_common(oracle, o);
    oracle->add_option("--counts", o.counts, "color counts")->delimiter(',');
    oracle->add_option("--q", o.q, "undecided agents");
    oracle->add_option("--horizon", o.horizon, "truncate absorption at this many rounds");
    oracle->add_flag("--no-absorption", o.no_absorption);

    auto* sweep = app.add_subcommand("sweep", "convergence time against md");
    add_common(sweep, o);
    sweep->add_option("--n", o.n);
    sweep->add_option("--alpha", o.alpha);
    sweep->add_option("--max-rounds", o.max_rounds);
    sweep->add_option("--seeds", o.seeds, "explicit seed list")->delimiter(',');
    sweep->add_option("--seed-count", o.seed_count);
    sweep->add_option("--md-targets", o.md_targets)->delimiter(',');
    sweep->add_option("--workers", o.workers);

    auto* phases = app.add_subcommand("phases", "run once and locate the phase boundaries");
    add_common(phases, o);
    add_init(phases, o);
    phases->add_option("--max-rounds", o.max_rounds);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << json{{"error", "validation"}, {"message", e.what()}, {"exit_code", 1}}.dump() << '\n';
        return 1;
    }

    usd::Mode mode = usd::Mode::complete;
    if (*expander) mode = usd::Mode::expander;
    else if (*oracle) mode = usd::Mode::oracle;
    else if (*sweep) mode = usd::Mode::sweep;
    else if (*phases) mode = usd::Mode::phases;

    json file;
    if (o.config_file) {
        try {
            file = usd::load_experiment_file(*o.config_file);
        } catch (const usd::Error& e) {
            const int code = e.is_input_error() ? 1 : 2;
            std::cerr << json{{"error", e.kind()}, {"message", e.what()}, {"exit_code", code}}.dump() << '\n';
            return code;
        }
    }
    return usd::run_experiment(mode, file, build_flags(mode, o), std::cerr);
}
