#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace usd {

inline constexpr const char* kToolName = "usdlab";
inline constexpr const char* kToolVersion = "1.0.0";

enum class Mode { complete, expander, oracle, sweep, phases };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);

/// Fully resolved experiment: every parameter that influences the run, and
/// for each leaf where its value came from ("default", "file", "flag").
struct ResolvedExperiment {
    Mode mode = Mode::complete;
    nlohmann::json params;
    nlohmann::json sources;
};

/// Layers defaults < file < flags. `file` may carry a "mode" field; it must
/// agree with `mode`. Throws ValidationError on unknown or malformed fields.
ResolvedExperiment resolve_experiment(Mode mode, const nlohmann::json& file, const nlohmann::json& flags);

/// In-memory output of a run; nothing touches the disk until commit.
struct Artifacts {
    std::vector<std::pair<std::string, std::string>> files;

    void add(std::string name, std::string content) { files.emplace_back(std::move(name), std::move(content)); }
    const std::string* find(const std::string& name) const;
};

/// Runs the experiment and returns every artifact, manifest.json included.
Artifacts execute(const ResolvedExperiment& experiment);

/// Writes all artifacts into `dir` via temporary names and renames; on
/// failure anything written is removed again. Throws IoError.
void commit(const Artifacts& artifacts, const std::filesystem::path& dir);

/// resolve + execute + commit. Errors are reported as one JSON object on
/// `err`; returns 0 (ok), 1 (invalid input), or 2 (runtime failure).
int run_experiment(Mode mode, const nlohmann::json& file, const nlohmann::json& flags, std::ostream& err);

/// Reads a JSON experiment file; throws ValidationError / IoError.
nlohmann::json load_experiment_file(const std::filesystem::path& path);

} // namespace usd
