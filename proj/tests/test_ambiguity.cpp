#include <doctest.h>

#include <cmath>

#include "frac/ambiguity.hpp"
#include "frac/rng.hpp"

using namespace frac;

namespace {

SystemConfig table1(double c = kSpeedOfLight) {
    RawParams p = table1_params();
    p.c = c;
    return derive(p);
}

std::vector<AfQuery> axis_line(int axis, int points) {
    std::vector<AfQuery> q(points);
    for (int i = 0; i < points; ++i) {
        const double x = -0.5 + static_cast<double>(i) / points;
        if (axis == 0) q[i].d_r = x;
        else if (axis == 1) q[i].d_v = x;
        else q[i].d_theta = x;
    }
    return q;
}

}  // namespace

TEST_CASE("dirichlet kernel") {
    CHECK(dirichlet(8, 0.0) == 8.0);
    CHECK(dirichlet(8, 1.0) == -8.0);
    CHECK(dirichlet(7, 1.0) == 7.0);
    CHECK(dirichlet(8, 2.0) == 8.0);
    CHECK(std::abs(dirichlet(4, 0.5)) < 1e-12);
    CHECK(dirichlet(8, 1e-14) == doctest::Approx(8.0));
    CHECK(dirichlet(5, 0.3) == doctest::Approx(std::sin(5 * kPi * 0.3) / std::sin(kPi * 0.3)));
    // continuity across the guard
    CHECK(dirichlet(6, 1.0 + 1e-9) == doctest::Approx(dirichlet(6, 1.0)).epsilon(1e-6));
}

TEST_CASE("instantaneous AF peak and symmetry") {
    const SystemConfig c = table1();
    for (int t = 0; t < 5; ++t) {
        auto rng = stream_rng(1, 0xa, t);
        const auto sel = random_selection_sequence(c, rng);
        const cd peak = instantaneous_af(sel, c.Q_r, {});
        CHECK(std::abs(peak - cd(c.N * c.K * c.Q_r, 0)) < 1e-9);
        const AfQuery q{0.13, -0.31, 0.07}, mq{-0.13, 0.31, -0.07};
        CHECK(std::abs(instantaneous_af(sel, c.Q_r, mq) - std::conj(instantaneous_af(sel, c.Q_r, q))) < 1e-9);
    }
}

TEST_CASE("expected AF closed form") {
    const SystemConfig c = table1();
    const double peak = c.N * c.K * c.Q_r;
    CHECK(expected_af(c, {}) == doctest::Approx(peak));
    CHECK(expected_af(c, {1.0 / c.M, 0, 0}) < 1e-9);
    CHECK(expected_af(c, {0, 1.0 / c.N, 0}) < 1e-9);
    CHECK(expected_af(c, {0, 0, 1.0 / (c.P * c.Q_r)}) < 1e-9);
    CHECK(expected_af(c, {1.0 / 16, 0, 0}) == doctest::Approx(8.0 / std::sin(kPi / 16)));
    CHECK(expected_af(c, {1.0 / 16, 0, 0}) == doctest::Approx(41.0).epsilon(0.002));
    // bounded by the peak, equal only at integer offsets, 1-periodic
    for (double a = -1.0; a <= 1.0; a += 0.0625)
        for (double b = -1.0; b <= 1.0; b += 0.0625) {
            const AfQuery q{a, b, 0.5 * a - 0.25 * b};
            const double v = expected_af(c, q);
            CHECK(v <= peak * (1 + 1e-12));
            const AfQuery q1{a + 1, b - 1, q.d_theta + 1};
            CHECK(expected_af(c, q1) == doctest::Approx(v).epsilon(1e-9));
        }
    CHECK(expected_af(c, {0.5, 0, 0}) < peak);
    CHECK(expected_af(c, {1, -1, 2}) == doctest::Approx(peak));
}

TEST_CASE("resolutions") {
    const Resolutions r = resolutions(table1(3e8));
    CHECK(r.range == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(r.velocity == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(r.angle * 180 / kPi == doctest::Approx(14.48).epsilon(0.01 / 14.48));
    CHECK(r.angle == doctest::Approx(std::asin(0.25)));

    RawParams p = table1_params();
    p.M = 1;
    p.K = 1;
    p.B = 12.5e6;
    const SystemConfig c1 = derive(p);
    CHECK(resolutions(c1).range == doctest::Approx(c1.c / (2 * c1.delta_f)));

    p = table1_params();
    const double v32 = resolutions(derive(p)).velocity;
    p.N = 64;
    CHECK(resolutions(derive(p)).velocity == doctest::Approx(v32 / 2));

    // more carriers at a fixed step: finer range cells
    double last = 1e9;
    for (int M : {2, 4, 8, 16, 32}) {
        RawParams q = table1_params();
        q.M = M;
        q.B = 12.5e6 * M;
        const double dr = resolutions(derive(q)).range;
        CHECK(dr < last);
        last = dr;
    }
}

TEST_CASE("monte carlo mean matches the closed form") {
    const SystemConfig c = table1();
    const double peak = c.N * c.K * c.Q_r;
    for (int axis = 0; axis < 3; ++axis) {
        const auto q = axis_line(axis, 64);
        const AfAverage avg = monte_carlo_af(c, q, 2000, 5, SelectionMode::kUniform, 1);
        double worst = 0;
        for (std::size_t i = 0; i < q.size(); ++i)
            worst = std::max(worst, std::abs(std::abs(avg.mean[i]) - expected_af(c, q[i])));
        CHECK(worst <= 0.02 * peak);
        // the average magnitude never falls below the magnitude of the average
        for (std::size_t i = 0; i < q.size(); ++i) CHECK(avg.mean_abs[i] >= std::abs(avg.mean[i]) - 1e-9);
    }
}

TEST_CASE("monte carlo error shrinks like one over root n") {
    const SystemConfig c = table1();
    const auto q = axis_line(0, 64);
    auto rms = [&](int cpis) {
        const AfAverage avg = monte_carlo_af(c, q, cpis, 8, SelectionMode::kUniform, 1);
        double s = 0;
        for (std::size_t i = 0; i < q.size(); ++i) s += std::norm(std::abs(avg.mean[i]) - expected_af(c, q[i]));
        return std::sqrt(s / q.size());
    };
    const double ratio = rms(250) / rms(4000);
    CHECK(ratio > 2.0);
    CHECK(ratio < 8.0);
}

TEST_CASE("monte carlo is independent of the worker count") {
    const SystemConfig c = table1();
    const auto q = axis_line(2, 16);
    const AfAverage a = monte_carlo_af(c, q, 300, 3, SelectionMode::kUniform, 1);
    const AfAverage b = monte_carlo_af(c, q, 300, 3, SelectionMode::kUniform, 4);
    CHECK(a.mean == b.mean);
    CHECK(a.mean_abs == b.mean_abs);
    CHECK_THROWS_AS(monte_carlo_af(c, q, 0, 3), ValidationError);
}

TEST_CASE("cross-section planes") {
    const SystemConfig c = table1();
    const auto e = af_plane(c, nullptr, AfPlane::kRangeAngle, 16, 2);
    REQUIRE(e.size() == 256u);
    CHECK(e.front().a == doctest::Approx(-0.5));
    CHECK(e.front().b == doctest::Approx(-0.5));
    // index (8, 8) is the zero offset
    CHECK(e[8 * 16 + 8].magnitude == doctest::Approx(c.N * c.K * c.Q_r));
    auto rng = stream_rng(2, 2, 2);
    const auto sel = random_selection_sequence(c, rng);
    const auto r = af_plane(c, &sel, AfPlane::kVelocityAngle, 16, 1);
    CHECK(r[8 * 16 + 8].magnitude == doctest::Approx(c.N * c.K * c.Q_r));
    CHECK_THROWS_AS(af_plane(c, nullptr, AfPlane::kRangeAngle, 0), ValidationError);
}
