#include "usdlab/experiment.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "usdlab/analysis.hpp"
#include "usdlab/complete.hpp"
#include "usdlab/config.hpp"
#include "usdlab/errors.hpp"
#include "usdlab/expander.hpp"
#include "usdlab/graph.hpp"
#include "usdlab/oracle.hpp"

namespace usd {

using nlohmann::json;

std::string to_string(Mode mode) {
    switch (mode) {
    case Mode::complete: return "complete";
    case Mode::expander: return "expander";
    case Mode::oracle: return "oracle";
    case Mode::sweep: return "sweep";
    case Mode::phases: return "phases";
    }
    return "?";
}

Mode mode_from_string(const std::string& name) {
    if (name == "complete" || name == "simulate-complete") return Mode::complete;
    if (name == "expander" || name == "simulate-expander") return Mode::expander;
    if (name == "oracle") return Mode::oracle;
    if (name == "sweep") return Mode::sweep;
    if (name == "phases") return Mode::phases;
    throw ValidationError("unknown mode '" + name + "'");
}

const std::string* Artifacts::find(const std::string& name) const {
    for (const auto& [n, content] : files)
        if (n == name) return &content;
    return nullptr;
}

namespace {

json init_defaults(Count n, std::size_t k) {
    return json{{"kind", "uniform"}, {"n", n}, {"k", k}, {"alpha", 0.2}, {"elite", 1}, {"counts", nullptr}};
}

json run_defaults() {
    return json{{"max_rounds", 100000}, {"record_every", 1}, {"alpha_hint", 0.2}};
}

json analysis_defaults() {
    return json{{"gamma", 4.0}, {"eps_tilde", 0.05}, {"lambda", 1.0}, {"kappa", 10.0}};
}

json defaults_for(Mode mode) {
    json d{{"seed", 1}, {"seeds", nullptr}, {"out", "out"}};
    switch (mode) {
    case Mode::complete:
        d["init"] = init_defaults(1000, 4);
        d["run"] = run_defaults();
        break;
    case Mode::phases:
        d["init"] = init_defaults(100000, 10);
        d["run"] = run_defaults();
        d["analysis"] = analysis_defaults();
        break;
    case Mode::expander:
        d["init"] = init_defaults(1024, 4);
        d["expander"] = json{{"d", 8},          {"alpha", 4.0},      {"c", 3.0},
                             {"laziness", 0.5}, {"eps", nullptr},    {"max_phases", 1000},
                             {"record_every", 1}, {"alpha_hint", 0.2}};
        break;
    case Mode::oracle:
        d["oracle"] = json{{"config", {{"counts", {1, 1}}, {"q", 0}}},
                           {"horizon", nullptr},
                           {"absorption", true},
                           {"max_n", 12},
                           {"max_k", 3}};
        break;
    case Mode::sweep:
        d["init"] = json{{"n", 100000}, {"alpha", 0.2}};
        d["sweep"] = json{{"md_targets", {2, 4, 8, 16, 32}}, {"family", nullptr}, {"seed_count", 10},
                          {"workers", 1}, {"max_k", 90}};
        d["run"] = run_defaults();
        d["analysis"] = analysis_defaults();
        break;
    }
    return d;
}

void mark_sources(const json& node, const std::string& prefix, const std::string& origin, json& sources) {
    for (auto it = node.begin(); it != node.end(); ++it) {
        const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (it->is_object() && !it->empty()) {
            mark_sources(*it, path, origin, sources);
        } else {
            sources[path] = origin;
        }
    }
}

void layer(json& target, const json& patch, const std::string& prefix, const std::string& origin,
           json& sources) {
    if (!patch.is_object()) throw ValidationError("expected an object at '" + prefix + "'");
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (prefix.empty() && it.key() == "mode") continue;
        if (!target.contains(it.key())) throw ValidationError("unknown field '" + path + "'");
        json& slot = target[it.key()];
        if (slot.is_object() && it->is_object()) {
            layer(slot, *it, path, origin, sources);
        } else {
            slot = *it;
            if (it->is_object()) {
                mark_sources(*it, path, origin, sources);
            } else {
                sources[path] = origin;
            }
        }
    }
}

template <class T>
T field(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad field '") + key + "': " + e.what());
    }
}

InitSpec init_from(const json& j) {
    InitSpec spec;
    spec.kind = init_kind_from_string(field<std::string>(j, "kind"));
    spec.n = field<Count>(j, "n");
    spec.alpha = field<double>(j, "alpha");
    spec.elite = field<std::size_t>(j, "elite");
    if (spec.kind == InitKind::custom) {
        if (j.at("counts").is_null()) throw ValidationError("custom init needs counts");
        spec.counts = field<std::vector<Count>>(j, "counts");
        spec.k = spec.counts.size();
    } else {
        spec.k = field<std::size_t>(j, "k");
    }
    return spec;
}

RunParams run_from(const json& j, std::uint64_t seed) {
    RunParams p;
    p.max_rounds = field<std::uint64_t>(j, "max_rounds");
    p.record_every = field<std::uint64_t>(j, "record_every");
    p.alpha_hint = field<double>(j, "alpha_hint");
    p.seed = seed;
    validate(p);
    return p;
}

PhaseThresholds thresholds_from(const json& j) {
    return {field<double>(j, "gamma"), field<double>(j, "eps_tilde")};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

} // namespace

ResolvedExperiment resolve_experiment(Mode mode, const json& file, const json& flags) {
    ResolvedExperiment out;
    out.mode = mode;
    if (!file.is_null()) {
        if (!file.is_object()) throw ValidationError("experiment file must hold a JSON object");
        if (file.contains("mode") && mode_from_string(file.at("mode").get<std::string>()) != mode)
            throw ValidationError("experiment file mode '" + file.at("mode").get<std::string>() +
                                  "' does not match subcommand '" + to_string(mode) + "'");
    }
    out.params = defaults_for(mode);
    out.sources = json::object();
    mark_sources(out.params, "", "default", out.sources);
    if (!file.is_null()) layer(out.params, file, "", "file", out.sources);
    if (!flags.is_null()) layer(out.params, flags, "", "flag", out.sources);

    auto& p = out.params;
    if (p.contains("init") && p["init"].contains("counts") && !p["init"]["counts"].is_null() &&
        p["init"].value("kind", "") == "custom") {
        const auto counts = field<std::vector<Count>>(p["init"], "counts");
        Count total = 0;
        for (Count c : counts) total += c;
        if (out.sources["init.n"] == "default") {
            p["init"]["n"] = total;
            out.sources["init.n"] = "derived";
        }
        if (out.sources["init.k"] == "default") {
            p["init"]["k"] = counts.size();
            out.sources["init.k"] = "derived";
        }
    }
    if (!p.at("seeds").is_null()) {
        const auto seeds = field<std::vector<std::uint64_t>>(p, "seeds");
        if (seeds.empty()) throw ValidationError("seeds must be non-empty");
        if (mode != Mode::sweep) {
            if (seeds.size() != 1) throw ValidationError("this mode takes a single seed");
            p["seed"] = seeds.front();
            out.sources["seed"] = out.sources["seeds"];
        }
    }
    if (mode == Mode::phases && field<std::uint64_t>(p.at("run"), "record_every") != 1) {
        p["run"]["record_every"] = 1;
        out.sources["run.record_every"] = "mode";
    }
    if (field<std::string>(p, "out").empty()) throw ValidationError("output directory must be set");
    return out;
}

Artifacts execute(const ResolvedExperiment& experiment) {
    const json& p = experiment.params;
    const auto seed = field<std::uint64_t>(p, "seed");
    Artifacts art;
    json derived = json::object();

    switch (experiment.mode) {
    case Mode::complete:
    case Mode::phases: {
        const InitSpec spec = init_from(p.at("init"));
        const RunParams rp = run_from(p.at("run"), seed);
        Rng rng(seed);
        const auto config = generate_initial(spec, rng);
        const auto trace = run(config, rp, rng);
        art.add("trace.csv", trace_csv(trace));
        json summary = summary_json(trace);
        summary["warnings"] = trace.warnings;
        art.add("summary.json", dump(summary));
        if (experiment.mode == Mode::phases) {
            const auto& a = p.at("analysis");
            const auto th = thresholds_from(a);
            const auto phases = detect_phases(trace, th);
            json pj = to_json(phases);
            if (config.plurality() > 0) pj["plateau_persistence_target"] = plateau_persistence(md(config), th.gamma);
            art.add("phases.json", dump(pj));
            MonotonicityParams mp{field<double>(a, "lambda"), field<double>(a, "kappa")};
            art.add("monotonicity.json", dump(to_json(check_monotonicity(trace, mp))));
        }
        break;
    }
    case Mode::expander: {
        const InitSpec spec = init_from(p.at("init"));
        const auto& e = p.at("expander");
        Rng rng(seed);
        const auto config = generate_initial(spec, rng);
        const auto graph = gen_regular_graph(static_cast<std::size_t>(config.n()), field<std::size_t>(e, "d"), rng);
        const auto agents = agents_from_config(config, rng);
        std::optional<double> eps;
        if (!e.at("eps").is_null()) eps = field<double>(e, "eps");
        const auto phase = derive_phase_params(graph, field<double>(e, "alpha"), field<double>(e, "c"),
                                               field<double>(e, "laziness"), eps);
        ExpanderRunParams rp;
        rp.max_phases = field<std::uint64_t>(e, "max_phases");
        rp.record_every = field<std::uint64_t>(e, "record_every");
        rp.alpha_hint = field<double>(e, "alpha_hint");
        rp.seed = seed;
        const auto result = run_expander(graph, agents, phase, rp, rng);

        const double n = static_cast<double>(graph.n());
        derived["eps"] = eps.value_or(1.0 / (n * n));
        derived["hops"] = phase.hops;
        derived["tau"] = phase.tau;
        derived["congestion_bound"] = congestion_bound(phase.tau, graph.n(), phase.c);

        art.add("graph.txt", graph_text(graph));
        art.add("trace.csv", expander_trace_csv(result));
        json stats = json::array();
        std::ostringstream congestion;
        congestion << "phase,round,max_queue,mean_queue\n";
        for (std::size_t i = 0; i < result.phases.size(); ++i) {
            json s = to_json(result.phases[i]);
            s["phase"] = result.trace.rows[i + 1].round;
            stats.push_back(std::move(s));
            for (const auto& h : result.phases[i].histogram)
                congestion << result.trace.rows[i + 1].round << ',' << h.round << ',' << h.max_queue << ','
                           << format_double(h.mean_queue) << '\n';
        }
        art.add("phase_stats.json", dump(stats));
        art.add("congestion.csv", congestion.str());
        json summary = summary_json(result.trace);
        summary["hops"] = phase.hops;
        summary["tau"] = phase.tau;
        art.add("summary.json", dump(summary));
        break;
    }
    case Mode::oracle: {
        const auto& o = p.at("oracle");
        ColorConfiguration config;
        try {
            from_json(o.at("config"), config);
        } catch (const json::exception& ex) {
            throw ValidationError(std::string("bad oracle config: ") + ex.what());
        }
        OracleLimits limits;
        limits.max_n = field<Count>(o, "max_n");
        limits.max_k = field<std::size_t>(o, "max_k");
        art.add("distribution.json", dump(to_json(exact_step_distribution(config, limits))));
        if (field<bool>(o, "absorption")) {
            std::optional<std::uint64_t> horizon;
            if (!o.at("horizon").is_null()) horizon = field<std::uint64_t>(o, "horizon");
            art.add("absorption.json", dump(to_json(exact_absorption(config, horizon, limits))));
        }
        break;
    }
    case Mode::sweep: {
        const auto& s = p.at("sweep");
        const auto& init = p.at("init");
        std::vector<InitSpec> family;
        if (!s.at("family").is_null()) {
            for (const auto& member : s.at("family")) {
                InitSpec spec;
                try {
                    from_json(member, spec);
                } catch (const json::exception& ex) {
                    throw ValidationError(std::string("bad family member: ") + ex.what());
                }
                family.push_back(spec);
            }
        } else {
            family = md_ladder(field<Count>(init, "n"), field<double>(init, "alpha"),
                               field<std::vector<double>>(s, "md_targets"), field<std::size_t>(s, "max_k"));
        }
        std::vector<std::uint64_t> seeds;
        if (!p.at("seeds").is_null()) {
            seeds = field<std::vector<std::uint64_t>>(p, "seeds");
        } else {
            const auto count = field<std::size_t>(s, "seed_count");
            if (count == 0) throw ValidationError("seed_count must be >= 1");
            for (std::size_t i = 0; i < count; ++i) seeds.push_back(mix_seed(seed, i));
        }
        SweepParams sp;
        sp.run = run_from(p.at("run"), seed);
        sp.thresholds = thresholds_from(p.at("analysis"));
        sp.workers = field<std::size_t>(s, "workers");
        const auto result = sweep_md(family, seeds, sp);
        derived["family"] = family;
        derived["seeds"] = seeds;
        art.add("sweep.csv", sweep_csv(result));
        art.add("fit.json", dump(fit_json(result)));
        break;
    }
    }

    json manifest{{"tool", kToolName},
                  {"version", kToolVersion},
                  {"mode", to_string(experiment.mode)},
                  {"precedence", "flags > file > defaults"},
                  {"parameters", p},
                  {"sources", experiment.sources},
                  {"derived", derived}};
    json names = json::array();
    for (const auto& [name, content] : art.files) names.push_back(name);
    manifest["artifacts"] = names;
    art.add("manifest.json", dump(manifest));
    return art;
}

void commit(const Artifacts& artifacts, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

    std::vector<fs::path> written;
    auto rollback = [&] {
        std::error_code ignore;
        for (const auto& path : written) fs::remove(path, ignore);
    };
    for (const auto& [name, content] : artifacts.files) {
        const fs::path partial = dir / (name + ".partial");
        written.push_back(partial);
        std::ofstream out(partial, std::ios::binary | std::ios::trunc);
        out << content;
        out.close();
        if (!out) {
            rollback();
            throw IoError("cannot write " + partial.string());
        }
    }
    for (const auto& [name, content] : artifacts.files) {
        const fs::path partial = dir / (name + ".partial");
        const fs::path final_path = dir / name;
        fs::rename(partial, final_path, ec);
        if (ec) {
            rollback();
            throw IoError("cannot move " + partial.string() + " into place: " + ec.message());
        }
        written.push_back(final_path);
    }
}

int run_experiment(Mode mode, const json& file, const json& flags, std::ostream& err) {
    auto report = [&](const std::string& kind, const std::string& message, int code) {
        err << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
        return code;
    };
    try {
        const auto experiment = resolve_experiment(mode, file, flags);
        const auto artifacts = execute(experiment);
        commit(artifacts, experiment.params.at("out").get<std::string>());
        return 0;
    } catch (const Error& e) {
        return report(e.kind(), e.what(), e.is_input_error() ? 1 : 2);
    } catch (const json::exception& e) {
        return report("validation", e.what(), 1);
    } catch (const std::exception& e) {
        return report("runtime", e.what(), 2);
    }
}

json load_experiment_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open experiment file " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("experiment file is not valid JSON: " + std::string(e.what()));
    }
}

} // namespace usd
