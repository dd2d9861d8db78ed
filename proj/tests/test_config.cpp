#include "doctest.h"

#include <random>

#include "reference.hpp"
#include "usdlab/config.hpp"
#include "usdlab/errors.hpp"

using namespace usd;

TEST_CASE("make_config sorts and records labels") {
    const auto c = make_config({2, 4, 2}, 0);
    CHECK(c.counts() == std::vector<Count>{4, 2, 2});
    CHECK(c.n() == 8);
    CHECK(c.plurality_label() == 2);
    CHECK(c.by_label() == std::vector<Count>{2, 4, 2});

    const auto mono = make_config({5}, 0);
    CHECK(mono.k() == 1);
    CHECK(mono.is_monochromatic());

    const auto idle = make_config({0, 0}, 3);
    CHECK(idle.n() == 3);
    CHECK(idle.is_all_undecided());
    CHECK(idle.is_absorbing());
}

TEST_CASE("make_config rejects bad input") {
    CHECK_THROWS_AS(make_config({}, 0), ValidationError);
    CHECK_THROWS_AS(make_config({-1, 2}, 0), ValidationError);
    CHECK_THROWS_AS(make_config({1}, -2), ValidationError);
    const Count big = std::numeric_limits<Count>::max() / 2 + 1;
    CHECK_THROWS_AS(make_config({big, big}, 0), ValidationError);
    CHECK_THROWS_AS(ColorConfiguration::with_labels({1, 2}, {1, 1}, 0), ValidationError);
}

TEST_CASE("metric examples") {
    const auto c = make_config({4, 2, 2}, 0);
    CHECK(md(c) == doctest::Approx(1.5));
    CHECK(big_r(c) == doctest::Approx(2.0));
    CHECK(rr(c) == doctest::Approx(8.0 / 3.0));

    const auto mono = make_config({7, 0, 0}, 0);
    CHECK(md(mono) == 1.0);
    CHECK(big_r(mono) == 1.0);
    CHECK(rr(mono) == 1.0);

    CHECK(big_r(make_config({3, 3}, 2)) == doctest::Approx(2.0));

    for (std::size_t k = 1; k <= 12; ++k) {
        const auto u = make_config(std::vector<Count>(k, 9), 0);
        CHECK(md(u) == doctest::Approx(static_cast<double>(k)));
        CHECK(rr(u) == doctest::Approx(static_cast<double>(k)));
    }

    CHECK_THROWS_AS(md(make_config({0, 0}, 3)), MetricError);
    CHECK_THROWS_AS(big_r(make_config({0}, 1)), MetricError);
    CHECK_THROWS_AS(rr(make_config({0, 0}, 0)), MetricError);
}

TEST_CASE("expected_next examples") {
    const auto e = expected_next(make_config({2, 2}, 0));
    CHECK(e.mu == std::vector<double>{1.0, 1.0});
    CHECK(e.mu_q == 2.0);

    const auto m = expected_next(make_config({10}, 0));
    CHECK(m.mu == std::vector<double>{10.0});
    CHECK(m.mu_q == 0.0);

    CHECK_THROWS_AS(expected_next(make_config({0}, 0)), ValidationError);
}

TEST_CASE("first-round expectations from q = 0") {
    std::mt19937_64 gen(7);
    for (int t = 0; t < 200; ++t) {
        const std::size_t k = 2 + gen() % 9;
        std::vector<Count> raw(k);
        for (auto& x : raw) x = 1 + static_cast<Count>(gen() % 1000);
        const auto c = make_config(raw, 0);
        const auto e = expected_next(c);
        const double n = static_cast<double>(c.n());
        CHECK(e.mu[0] == doctest::Approx(n / (big_r(c) * big_r(c))).epsilon(1e-12));
        CHECK(e.mu_q == doctest::Approx(n * (1.0 - 1.0 / rr(c))).epsilon(1e-12));
    }
}

TEST_CASE("gamma drift examples") {
    CHECK(gamma_drift(make_config({5}, 0), 0.3).value == 0.0);
    CHECK(gamma_drift(make_config({5, 0, 0}, 0), 1.0).value == 0.0);

    const auto c = make_config({2, 1, 1}, 0);
    const auto g = gamma_drift(c, 1.0);
    CHECK(g.valid);
    CHECK(g.value == doctest::Approx(0.5));

    // Both sides equal 3/2 here, so the check is made with a relative
    // rounding allowance only.
    const auto e = expected_next(c);
    const double lhs = (e.mu[0] + 2.0 * e.mu_q) / 4.0;
    CHECK(lhs == doctest::Approx(1.5));
    CHECK(lhs >= (1.0 + g.value) * (1.0 - 1e-12));

    CHECK_FALSE(gamma_drift(make_config({3, 3}, 0), 0.1).valid);
    CHECK_THROWS_AS(gamma_drift(c, 0.0), ParameterError);
    CHECK_THROWS_AS(gamma_drift(c, -1.0), ParameterError);
}

namespace {

ref::Config random_config(std::mt19937_64& gen, bool with_q) {
    ref::Config x;
    const std::size_t k = 1 + gen() % 10;
    for (std::size_t i = 0; i < k; ++i) x.c.push_back(static_cast<std::int64_t>(gen() % 5000));
    x.c[0] += 1;
    x.q = with_q ? static_cast<std::int64_t>(gen() % 5000) : 0;
    return x;
}

} // namespace

TEST_CASE("property: metric bounds, conservation and label round trip") {
    std::mt19937_64 gen(11);
    for (int t = 0; t < 5000; ++t) {
        const auto x = random_config(gen, t % 2 == 1);
        const auto c = make_config(x.c, x.q);
        const double k = static_cast<double>(c.k());
        Count total = c.undecided();
        for (auto ci : c.counts()) total += ci;
        REQUIRE(total == c.n());
        REQUIRE(c.n() == x.n());
        REQUIRE(c.by_label() == x.c);
        REQUIRE(std::is_sorted(c.counts().rbegin(), c.counts().rend()));

        const double m = md(c);
        const double r = big_r(c);
        REQUIRE(m == doctest::Approx(ref::md(x)).epsilon(1e-12));
        REQUIRE(r == doctest::Approx(ref::big_r(x)).epsilon(1e-12));
        REQUIRE(m >= 1.0);
        REQUIRE(m <= k * (1 + 1e-12));
        REQUIRE(r >= 1.0);
        REQUIRE(r <= k * (1 + 1e-12));
        REQUIRE(rr(c) <= k * (1 + 1e-12));
        const auto nonzero = std::count_if(x.c.begin(), x.c.end(), [](auto v) { return v > 0; });
        REQUIRE((m == 1.0) == (nonzero == 1));

        const auto e = expected_next(c);
        double sum = e.mu_q;
        for (double v : e.mu) sum += v;
        REQUIRE(sum == doctest::Approx(static_cast<double>(c.n())).epsilon(1e-9));
    }
}

TEST_CASE("property: drift inequality on biased configurations") {
    std::mt19937_64 gen(5);
    const std::pair<std::int64_t, std::int64_t> alphas[] = {{1, 5}, {1, 1}, {1, 10}, {3, 2}};
    int checked = 0;
    for (int t = 0; t < 20000; ++t) {
        const auto [a, b] = alphas[t % 4];
        const double alpha = static_cast<double>(a) / static_cast<double>(b);
        ref::Config x;
        const std::size_t k = 1 + gen() % 10;
        const std::int64_t c1 = 1 + static_cast<std::int64_t>(gen() % 10000);
        x.c.push_back(c1);
        for (std::size_t i = 1; i < k; ++i)
            x.c.push_back(static_cast<std::int64_t>(gen() % (c1 * b / (a + b) + 1)));
        x.q = static_cast<std::int64_t>(gen() % 20000);
        if (!ref::biased(x, a, b)) continue;
        ++checked;
        const auto c = make_config(x.c, x.q);
        REQUIRE(ref::drift_slack(x, a, b) >= 0);
        const auto g = gamma_drift(c, alpha);
        REQUIRE(g.valid);
        REQUIRE(g.value >= 0.0);
        const auto e = expected_next(c);
        const double lhs = (e.mu[0] + 2.0 * e.mu_q) / static_cast<double>(c.n());
        REQUIRE(lhs >= (1.0 + g.value) * (1.0 - 1e-12));
    }
    CHECK(checked > 15000);
}

TEST_CASE("generators") {
    Rng rng(1);
    CHECK(generate_initial({InitKind::uniform, 100, 4, 0.0, 1, {}}, rng).counts() ==
          std::vector<Count>{25, 25, 25, 25});
    CHECK(generate_initial({InitKind::figure2, 64, 4, 0.0, 1, {}}, rng).counts() ==
          std::vector<Count>{40, 8, 8, 8});
    const auto custom = generate_initial({InitKind::custom, 6, 3, 0.0, 1, {3, 2, 1}}, rng);
    CHECK(custom.counts() == std::vector<Count>{3, 2, 1});
    CHECK(custom.n() == 6);

    for (std::size_t k : {2u, 5u, 10u, 50u}) {
        for (double alpha : {0.05, 0.2, 1.0}) {
            const auto u = generate_initial({InitKind::uniform, 100000, k, alpha, 1, {}}, rng);
            CHECK(u.n() == 100000);
            CHECK(u.k() == k);
            CHECK(u.undecided() == 0);
            CHECK(u.plurality_label() == 1);
            CHECK(has_bias(u, alpha));
            for (std::size_t elite = 1; elite <= k; ++elite) {
                const auto o = generate_initial({InitKind::oligarchic, 100000, k, alpha, elite, {}}, rng);
                CHECK(o.n() == 100000);
                CHECK(has_bias(o, alpha));
            }
        }
    }

    CHECK_THROWS_AS(generate_initial({InitKind::uniform, 3, 4, 0.2, 1, {}}, rng), SpecError);
    CHECK_THROWS_AS(generate_initial({InitKind::uniform, 10, 2, 50.0, 1, {}}, rng), SpecError);
    CHECK_THROWS_AS(generate_initial({InitKind::custom, 6, 3, 0.0, 1, {}}, rng), SpecError);
}

TEST_CASE("json round trip") {
    const auto c = make_config({2, 5, 1}, 4);
    const nlohmann::json j = c;
    CHECK(j.at("counts") == nlohmann::json{2, 5, 1});
    CHECK(j.at("q") == 4);
    CHECK(j.get<ColorConfiguration>() == c);

    const InitSpec spec{InitKind::oligarchic, 1000, 9, 0.2, 3, {}};
    const nlohmann::json js = spec;
    CHECK(js.at("kind") == "oligarchic");
    CHECK(js.get<InitSpec>() == spec);
}
