#include <doctest.h>

#include <cmath>

#include "frac/config.hpp"

using namespace frac;

TEST_CASE("default parameter derivation") {
    const SystemConfig c = derive(table1_params());
    CHECK(c.F_s_radar == doctest::Approx(416.68e3));
    CHECK(c.G == 25);
    CHECK(c.delta_f == doctest::Approx(12.5e6));
    CHECK(c.kappa == doctest::Approx(12.5e6 / 50e-6));
    CHECK(c.d_T == doctest::Approx(c.Q_r * c.d_R));
    CHECK(c.d_R == doctest::Approx(c.lambda / 2));
    CHECK(c.F_s_comm == doctest::Approx(100e6));
    CHECK(c.U == 5000);
    CHECK(c.r_max == doctest::Approx(416.68e3 * kSpeedOfLight * 60.88e-6 / (2 * 12.5e6)));
}

TEST_CASE("r_max drives the sampling rate") {
    RawParams p = table1_params();
    p.F_s_radar.reset();
    p.r_max = 304.4;
    p.c = 3e8;
    const SystemConfig c = derive(p);
    CHECK(c.F_s_radar == doctest::Approx(2 * 304.4 * 12.5e6 / (3e8 * 60.88e-6)));
    CHECK(c.F_s_radar == doctest::Approx(416.7e3).epsilon(1e-3));
}

TEST_CASE("r_max and F_s_radar together are rejected") {
    RawParams p = table1_params();
    p.r_max = 300.0;
    CHECK_THROWS_AS(derive(p), ValidationError);
    p.F_s_radar.reset();
    p.r_max.reset();
    CHECK_THROWS_AS(derive(p), ValidationError);
}

TEST_CASE("full duty cycle keeps G") {
    RawParams p = table1_params();
    p.T_p = p.T_0;
    const SystemConfig c = derive(p);
    CHECK(c.G == 25);
    CHECK(c.kappa == doctest::Approx(c.delta_f / c.T_0));
}

TEST_CASE("invalid parameters") {
    RawParams p = table1_params();
    SUBCASE("K above min(M,P)") {
        p.K = 5;
        CHECK_THROWS_AS(derive(p), ValidationError);
    }
    SUBCASE("pulse longer than PRI") {
        p.T_p = 70e-6;
        CHECK_THROWS_AS(derive(p), ValidationError);
    }
    SUBCASE("J not a power of two") {
        p.J = 3;
        CHECK_THROWS_AS(derive(p), ValidationError);
    }
    SUBCASE("zero receivers") {
        p.Q_c = 0;
        CHECK_THROWS_AS(derive(p), ValidationError);
    }
}

TEST_CASE("derive is idempotent") {
    const SystemConfig a = derive(table1_params());
    const SystemConfig b = derive(a.raw);
    CHECK(a == b);
}

TEST_CASE("bit budgets") {
    const BitBudget b = bit_budget(8, 1, 4, 2);
    CHECK(b.n_im == 5);
    CHECK(b.n_pm == 1);
    CHECK(b.n_total == 6);

    const BitBudget f4 = bit_budget(2, 1, 2, 2);
    CHECK(f4.n_im == 2);
    CHECK(f4.n_total == 3);

    const BitBudget k2 = bit_budget(8, 2, 4, 2);
    CHECK(k2.n_carrier == 4);
    CHECK(k2.n_antenna == 2);
    CHECK(k2.n_perm == 1);
    CHECK(k2.n_pm == 2);
    CHECK(k2.n_total == 9);

    // only the permutation term survives
    const BitBudget sq = bit_budget(4, 4, 4, 2);
    CHECK(sq.n_carrier == 0);
    CHECK(sq.n_antenna == 0);
    CHECK(sq.n_perm == 4);   // floor(log2 24)
    CHECK(sq.n_im == 4);

    CHECK(bit_budget(8, 1, 4, 4).n_total == 7);
}

TEST_CASE("combinatorics") {
    CHECK(binomial(8, 2) == 28);
    CHECK(binomial(64, 32) == 1832624140942590534ull);
    CHECK_THROWS_AS(binomial(100, 50), ValidationError);
    CHECK(factorial(5) == 120);
    CHECK(floor_log2(1) == 0);
    CHECK(floor_log2(28) == 4);
    CHECK(floor_log2(32) == 5);
}

TEST_CASE("json round trip") {
    RawParams p = table1_params();
    p.K = 2;
    p.c = 3e8;
    p.seed = 77;
    const RawParams q = params_from_json(params_to_json(p));
    CHECK(p == q);
    CHECK(config_hash(p) == config_hash(q));
    p.K = 1;
    CHECK(config_hash(p) != config_hash(q));
}

TEST_CASE("json parsing") {
    CHECK_THROWS_AS(params_from_json(R"({"N": 16, "bogus": 1})"), ValidationError);
    CHECK_THROWS_AS(params_from_json("{not json"), ValidationError);
    const RawParams p = params_from_json(R"({"N": 16, "r_max": 250})");
    CHECK(p.N == 16);
    REQUIRE(p.r_max);
    CHECK_FALSE(p.F_s_radar);
    const SystemConfig c = derive(p);
    CHECK(c.r_max == doctest::Approx(250));
}
