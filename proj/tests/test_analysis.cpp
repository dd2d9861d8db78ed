#include "doctest.h"

#include <cmath>

#include "usdlab/analysis.hpp"
#include "usdlab/errors.hpp"

using namespace usd;

namespace {

// q falls linearly from n to 0 over 100 rounds while two colors share the
// rest evenly; nothing ever converges.
RunTrace linear_trace(Count n) {
    RunTrace t;
    t.initial = make_config({n / 2, n / 2}, 0);
    t.rows.push_back(make_row(0, t.initial, 0.2));
    for (std::uint64_t r = 1; r <= 100; ++r) {
        const Count q = n - n * static_cast<Count>(r) / 100;
        const Count c = (n - q) / 2;
        t.rows.push_back(make_row(r, make_config({c, n - q - c}, q), 0.2));
    }
    t.outcome = Outcome::timeout;
    return t;
}

} // namespace

TEST_CASE("phases of a monochromatic run") {
    Rng rng(1);
    const auto t = run(make_config({50}, 0), {}, rng);
    const auto p = detect_phases(t);
    CHECK(p.first_round_end == 0u);
    CHECK(p.age_of_undecided_end == 0u);
    CHECK(p.plateau_end == 0u);
    CHECK(p.convergence_round == 0u);
}

TEST_CASE("synthetic linear undecided decay") {
    const auto t = linear_trace(10000);
    const auto p = detect_phases(t, {4.0, 0.05});
    // q_t = n (1 - t/100) < 0.55 n first at t = 46.
    CHECK(p.first_round_end == 1u);
    CHECK(p.age_of_undecided_end == 46u);
    // md = 2, so the plateau line 2 * 4 * n / 2 lies above n: never crossed.
    CHECK_FALSE(p.plateau_end.has_value());
    CHECK_FALSE(p.convergence_round.has_value());

    const auto wider = detect_phases(t, {4.0, 0.10});
    CHECK(wider.age_of_undecided_end == 41u);
}

TEST_CASE("phase detection needs round 1") {
    auto t = linear_trace(1000);
    t.rows.erase(t.rows.begin() + 1);
    CHECK_THROWS_AS(detect_phases(t), AnalysisError);
}

TEST_CASE("property: boundaries ordered and monotone in eps_tilde") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        Rng rng(s);
        const auto c = generate_initial({InitKind::uniform, 50000, 3 + s % 20, 0.2, 1, {}}, rng);
        const auto t = run(c, {}, rng);
        const auto p = detect_phases(t);
        REQUIRE(p.first_round_end.has_value());
        if (p.age_of_undecided_end) REQUIRE(*p.age_of_undecided_end >= *p.first_round_end);
        if (p.plateau_end) REQUIRE(*p.plateau_end >= *p.age_of_undecided_end);
        if (p.plateau_end && p.convergence_round) REQUIRE(*p.convergence_round >= *p.plateau_end);
        const auto wider = detect_phases(t, {4.0, 0.10});
        if (p.age_of_undecided_end) REQUIRE(*wider.age_of_undecided_end <= *p.age_of_undecided_end);
    }
}

TEST_CASE("plateau persistence") {
    CHECK(plateau_persistence(22.5, 4.0) == 0);
    CHECK(plateau_persistence(80.0, 4.0) == 1);
    CHECK(plateau_persistence(200.0, 1.0) == 25);
}

TEST_CASE("monotonicity guards") {
    RunTrace still;
    still.initial = make_config({1000, 0}, 0);
    for (std::uint64_t r = 0; r < 10; ++r) still.rows.push_back(make_row(r, still.initial, 0.2));
    const auto a = check_monotonicity(still);
    CHECK(a.eligible == 9);
    CHECK(a.violations == 0);
    CHECK_FALSE(a.insufficient_data);

    RunTrace thin;
    thin.initial = make_config({1, 1}, 998);
    for (std::uint64_t r = 0; r < 10; ++r) thin.rows.push_back(make_row(r, thin.initial, 0.2));
    const auto b = check_monotonicity(thin, {1000.0, 10.0});
    CHECK(b.eligible == 0);
    CHECK(b.violations == 0);
    CHECK(b.insufficient_data);

    RunTrace gap;
    gap.initial = make_config({900, 100}, 0);
    gap.rows.push_back(make_row(0, gap.initial, 0.2));
    gap.rows.push_back(make_row(5, make_config({100, 900}, 0), 0.2));
    CHECK(check_monotonicity(gap, {1.0, 0.1}).eligible == 0);
}

TEST_CASE("monotonicity flags a broken trajectory") {
    RunTrace t;
    t.initial = make_config({5000, 1000}, 0);
    t.rows.push_back(make_row(0, t.initial, 0.2));
    t.rows.push_back(make_row(1, make_config({500, 1000}, 4500), 0.2));
    const auto r = check_monotonicity(t, {1.0, 0.5});
    CHECK(r.eligible == 1);
    CHECK(r.violations == 1);
    CHECK(r.violation_rounds == std::vector<std::uint64_t>{0});
}

TEST_CASE("pearson") {
    CHECK_FALSE(pearson({1.0}, {2.0}).has_value());
    CHECK_FALSE(pearson({1.0, 1.0, 1.0}, {1.0, 2.0, 3.0}).has_value());
    CHECK(*pearson({1, 2, 3, 4}, {2, 4, 6, 8}) == doctest::Approx(1.0));
    CHECK(*pearson({1, 2, 3, 4}, {8, 6, 4, 2}) == doctest::Approx(-1.0));
    // Deviations (-1,0,1) and (-1,1,0): r = 1 / sqrt(2 * 2).
    CHECK(*pearson({1, 2, 3}, {1, 3, 2}) == doctest::Approx(0.5));
}

TEST_CASE("sweep of identical specs") {
    const InitSpec spec{InitKind::uniform, 20000, 5, 0.2, 1, {}};
    SweepParams params;
    const auto r = sweep_md({spec, spec, spec}, {1, 2, 3, 4}, params);
    REQUIRE(r.rows.size() == 3);
    CHECK(r.rows[0].mean_rounds == r.rows[1].mean_rounds);
    CHECK(r.rows[1].mean_rounds == r.rows[2].mean_rounds);
    CHECK(r.rows[0].std_rounds == r.rows[2].std_rounds);
    CHECK_FALSE(r.time_vs_md_log_n.has_value());
    CHECK_FALSE(r.plateau_vs_md.has_value());
    CHECK(fit_json(r).at("pearson_time_vs_md_log_n") == "undefined");
    for (const auto& row : r.rows) {
        CHECK(row.runs == 4);
        for (double f : {row.stall_frequency, row.win_frequency, row.timeout_frequency}) {
            CHECK(f >= 0.0);
            CHECK(f <= 1.0);
        }
    }
}

TEST_CASE("sweep determinism and worker independence") {
    const auto family = md_ladder(20000, 0.2, {2.0, 6.0});
    SweepParams one;
    SweepParams four;
    four.workers = 4;
    const auto a = sweep_md(family, {5, 6, 7}, one);
    const auto b = sweep_md(family, {5, 6, 7}, four);
    CHECK(sweep_csv(a) == sweep_csv(b));
    CHECK(fit_json(a).dump() == fit_json(b).dump());
}

TEST_CASE("two-point sweep ordering") {
    const auto family = md_ladder(100000, 0.2, {2.0, 32.0});
    REQUIRE(family.size() == 2);
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = 0; s < 10; ++s) seeds.push_back(mix_seed(77, s));
    const auto r = sweep_md(family, seeds, {});
    CHECK(r.rows[0].md0 < r.rows[1].md0);
    CHECK(r.rows[0].mean_rounds < r.rows[1].mean_rounds);
}

TEST_CASE("md ladder hits its targets") {
    const auto family = md_ladder(100000, 0.2, {2, 4, 8, 16, 32});
    REQUIRE(family.size() == 5);
    Rng rng(0);
    const double targets[] = {2, 4, 8, 16, 32};
    for (std::size_t i = 0; i < 5; ++i) {
        const auto c = generate_initial(family[i], rng);
        CHECK(std::abs(md(c) - targets[i]) / targets[i] < 0.05);
        CHECK(c.n() == 100000);
        CHECK(has_bias(c, 0.2));
    }
    CHECK_THROWS(sweep_md({{InitKind::uniform, 3, 5, 0.2, 1, {}}}, {1}, {}));
}
