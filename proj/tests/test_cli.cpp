#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "usdlab/errors.hpp"
#include "usdlab/experiment.hpp"

using namespace usd;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("usdlab_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

json run_ok(Mode mode, const json& file, json flags, const fs::path& out) {
    flags["out"] = out.string();
    std::ostringstream err;
    const int code = run_experiment(mode, file, flags, err);
    INFO(err.str());
    REQUIRE(code == 0);
    return json::parse(slurp(out / "manifest.json"));
}

int run_code(Mode mode, const json& file, const json& flags, std::string* message = nullptr) {
    std::ostringstream err;
    const int code = run_experiment(mode, file, flags, err);
    if (message) *message = err.str();
    return code;
}

} // namespace

TEST_CASE("oracle mode writes the four-outcome law") {
    const auto out = scratch("oracle");
    const auto manifest = run_ok(Mode::oracle, json{{"oracle", {{"config", {{"counts", {1, 1}}, {"q", 0}}}}}}, {}, out);
    const auto dist = json::parse(slurp(out / "distribution.json"));
    REQUIRE(dist.at("outcomes").size() == 4);
    for (const auto& o : dist.at("outcomes")) CHECK(o.at("p").get<double>() == doctest::Approx(0.25));
    const auto abs = json::parse(slurp(out / "absorption.json"));
    CHECK(abs.at("expected_time").get<double>() == doctest::Approx(8.0 / 3.0));
    CHECK(manifest.at("sources").at("oracle.config.counts") == "file");
    CHECK(manifest.at("sources").at("seed") == "default");
}

TEST_CASE("complete mode on a monochromatic custom spec") {
    const auto out = scratch("mono");
    const json file{{"mode", "complete"}, {"init", {{"kind", "custom"}, {"counts", {40, 0}}}}};
    run_ok(Mode::complete, file, {}, out);
    const auto summary = json::parse(slurp(out / "summary.json"));
    CHECK(summary.at("outcome") == "PluralityWin");
    CHECK(summary.at("convergence_round") == 0);
}

TEST_CASE("every mode is byte-reproducible") {
    const std::vector<std::pair<Mode, json>> cases{
        {Mode::complete, json{{"init", {{"n", 5000}, {"k", 5}}}}},
        {Mode::phases, json{{"init", {{"n", 20000}, {"k", 8}}}}},
        {Mode::oracle, json{{"oracle", {{"config", {{"counts", {2, 1, 1}}, {"q", 1}}}}}}},
        {Mode::expander, json{{"init", {{"n", 128}, {"k", 3}}}, {"expander", {{"d", 4}}}}},
        {Mode::sweep, json{{"init", {{"n", 20000}}}, {"sweep", {{"md_targets", {2, 8}}, {"seed_count", 3}}}}},
    };
    for (const auto& [mode, file] : cases) {
        const auto a = scratch(to_string(mode) + "_a");
        const auto b = scratch(to_string(mode) + "_b");
        run_ok(mode, file, json{{"seed", 9}}, a);
        run_ok(mode, file, json{{"seed", 9}}, b);
        std::size_t files = 0;
        for (const auto& entry : fs::directory_iterator(a)) {
            ++files;
            const auto name = entry.path().filename();
            INFO(to_string(mode) << " " << name.string());
            if (name == "manifest.json") {
                // Only the output directory may differ.
                auto ma = json::parse(slurp(entry.path()));
                auto mb = json::parse(slurp(b / name));
                ma["parameters"].erase("out");
                mb["parameters"].erase("out");
                CHECK(ma == mb);
            } else {
                CHECK(slurp(entry.path()) == slurp(b / name));
            }
        }
        CHECK(files >= 3);
    }
}

TEST_CASE("precedence: flags over file over defaults") {
    const json file{{"seed", 4}, {"init", {{"n", 3000}, {"k", 3}}}};
    const auto r = resolve_experiment(Mode::complete, file, json{{"init", {{"k", 6}}}});
    CHECK(r.params.at("seed") == 4);
    CHECK(r.params.at("init").at("n") == 3000);
    CHECK(r.params.at("init").at("k") == 6);
    CHECK(r.params.at("init").at("alpha") == 0.2);
    CHECK(r.sources.at("seed") == "file");
    CHECK(r.sources.at("init.k") == "flag");
    CHECK(r.sources.at("init.alpha") == "default");
    CHECK(r.sources.at("run.max_rounds") == "default");
}

TEST_CASE("input errors exit with 1 and leave nothing behind") {
    const auto out = scratch("bad");
    std::string msg;
    CHECK(run_code(Mode::complete, json{{"init", {{"bogus", 1}}}}, {{"out", out.string()}}, &msg) == 1);
    CHECK(json::parse(msg).at("error") == "validation");
    CHECK(run_code(Mode::complete, json{{"mode", "oracle"}}, {{"out", out.string()}}) == 1);
    CHECK(run_code(Mode::complete, json{{"init", {{"n", 2}, {"k", 5}}}}, {{"out", out.string()}}) == 1);
    CHECK(run_code(Mode::complete, json{{"init", {{"n", "many"}}}}, {{"out", out.string()}}) == 1);
    CHECK(run_code(Mode::oracle, json{{"oracle", {{"config", {{"counts", {9, 9}}, {"q", 0}}}}}},
                   {{"out", out.string()}}, &msg) == 1);
    CHECK(json::parse(msg).at("error") == "capacity");
    CHECK(run_code(Mode::sweep, json{{"seeds", json::array()}}, {{"out", out.string()}}) == 1);
    CHECK(run_code(Mode::complete, json{{"run", {{"record_every", 0}}}}, {{"out", out.string()}}) == 1);
    CHECK_FALSE(fs::exists(out / "manifest.json"));
}

TEST_CASE("runtime errors exit with 2") {
    const auto blocker = scratch("blocker");
    { std::ofstream(blocker) << "x"; }
    std::string msg;
    CHECK(run_code(Mode::complete, json{{"init", {{"n", 100}}}}, {{"out", (blocker / "sub").string()}}, &msg) == 2);
    CHECK(json::parse(msg).at("error") == "io");
    fs::remove(blocker);
}

TEST_CASE("commit is all or nothing") {
    const auto out = scratch("commit");
    Artifacts art;
    art.add("a.txt", "1");
    art.add("sub/b.txt", "2");
    CHECK_THROWS_AS(commit(art, out), IoError);
    CHECK_FALSE(fs::exists(out / "a.txt"));
    CHECK_FALSE(fs::exists(out / "a.txt.partial"));
}

#ifdef USDLAB_BINARY
TEST_CASE("binary: oracle subcommand and error JSON") {
    const auto out = scratch("bin");
    const std::string bin = USDLAB_BINARY;
    CHECK(std::system((bin + " oracle --counts 1,1 --out " + out.string()).c_str()) == 0);
    CHECK(fs::exists(out / "distribution.json"));
    const auto err = scratch("bin_err.json");
    const int status = std::system((bin + " simulate-complete --n 2 --k 5 --out " + out.string() + " 2> " + err.string()).c_str());
    CHECK(WEXITSTATUS(status) == 1);
    CHECK(json::parse(slurp(err)).at("error") == "spec");
    const int usage = std::system((bin + " simulate-complete --nope 2> /dev/null").c_str());
    CHECK(WEXITSTATUS(usage) == 1);
}
#endif
