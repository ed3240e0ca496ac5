#include <doctest.h>

#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "frac/harness.hpp"
#include "frac/radar_recovery.hpp"
#include "frac/rng.hpp"

using namespace frac;

namespace {

SystemConfig make_cfg(int N, int K, double c = kSpeedOfLight) {
    RawParams p = table1_params();
    p.N = N;
    p.K = K;
    p.c = c;
    return derive(p);
}

SelectionSequence draw(const SystemConfig& c, std::uint64_t i) {
    auto rng = stream_rng(17, 0xd1c, i);
    return random_selection_sequence(c, rng);
}

// L distinct grid points inside one cell, visible angles only, unit-modulus random-phase amplitudes.
struct GridScene {
    Scene scene;
    CVec b;
};

GridScene random_grid_scene(const SystemConfig& c, int L, int cell, std::mt19937_64& rng) {
    const int Q = c.Q();
    std::uniform_int_distribution<int> un(0, c.N - 1), um(0, c.M - 1), uq(1, Q - 1);
    std::uniform_real_distribution<double> ua(0, kTwoPi);
    std::set<std::size_t> used;
    GridScene out;
    out.b.assign(static_cast<std::size_t>(c.N) * c.M * Q, cd{});
    while (static_cast<int>(out.scene.size()) < L) {
        GridCoord g;
        g.cell = cell;
        g.n_idx = un(rng);
        g.m_idx = um(rng);
        g.q_idx = uq(rng);   // q = 0 is the endfire bin; keep it off the arcsin branch point
        g.flat = (static_cast<std::size_t>(g.n_idx) * c.M + g.m_idx) * Q + g.q_idx;
        if (!used.insert(g.flat).second) continue;
        const Target t = grid_target(g, c, std::polar(1.0, ua(rng)));
        out.scene.push_back(t);
        out.b[g.flat] = target_freqs(t, c, cell).alpha_tilde;
    }
    return out;
}

CVec cell_echo(const Scene& s, const SelectionSequence& sel, const SystemConfig& c, int cell, bool exact_xi) {
    auto rng = stream_rng(0, 0, 0);
    CellSimOptions o;
    o.gain = EchoGain::kUnit;
    o.exact_xi = exact_xi;
    return simulate_cell_direct(s, sel, c, 0.0, rng, cell, o).data;
}

double max_diff(const CVec& a, const CVec& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("dictionary entries") {
    const SystemConfig c = make_cfg(8, 2);
    const Dictionary A(draw(c, 0), c);
    CHECK(A.rows() == static_cast<std::size_t>(8 * 2 * 2));
    CHECK(A.cols() == static_cast<std::size_t>(8 * 8 * 8));
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < A.cols(); ++j) CHECK(std::abs(std::abs(A(i, j)) - 1.0) < 1e-12);
    for (cd x : A.column(A.flat_index(0, 0, 0))) CHECK(std::abs(x - cd(1, 0)) < 1e-15);
    CHECK(A.flat_index(2, 3, 4) == (2u * 8 + 3) * 8 + 4);
}

TEST_CASE("dictionary entry formula") {
    const SystemConfig c = make_cfg(4, 2);
    const SelectionSequence sel = draw(c, 1);
    for (bool exact : {true, false}) {
        const Dictionary A(sel, c, exact);
        const int Q = c.Q();
        double worst = 0;
        for (int n = 0; n < c.N; ++n)
            for (int k = 0; k < c.K; ++k)
                for (int qr = 0; qr < c.Q_r; ++qr) {
                    const int m = sel[n].carriers[k], p = sel[n].antennas[k];
                    const double xi = exact ? (c.f_c + m * c.delta_f) / c.f_c : 1.0;
                    for (int nn = 0; nn < c.N; ++nn)
                        for (int mm = 0; mm < c.M; ++mm)
                            for (int q = 0; q < Q; ++q) {
                                const double ph = -kTwoPi * (double(m) * mm / c.M + xi * double(nn) / c.N * n +
                                                             xi * double(q) / Q * (c.Q_r * p + qr));
                                const cd want = std::polar(1.0, ph);
                                const std::size_t row = (static_cast<std::size_t>(n) * c.K + k) * c.Q_r + qr;
                                worst = std::max(worst, std::abs(A(row, A.flat_index(nn, mm, q)) - want));
                            }
                }
        CHECK(worst < 1e-9);
    }
}

TEST_CASE("dictionary size cap") {
    const SystemConfig c = make_cfg(32, 1);
    CHECK_THROWS_AS(Dictionary(draw(c, 2), c, true, 1000), ValidationError);
}

TEST_CASE("generator and dictionary agree on on-grid scenes") {
    const SystemConfig c = make_cfg(16, 2);
    auto rng = stream_rng(4, 4, 4);
    for (bool exact : {true, false})
        for (int trial = 0; trial < 10; ++trial) {
            const SelectionSequence sel = draw(c, 100 + trial);
            const Dictionary A(sel, c, exact);
            const int cell = trial % 5;
            const GridScene gs = random_grid_scene(c, 1 + trial % 4, cell, rng);
            CVec Ab(A.rows());
            A.apply(gs.b.data(), Ab.data());
            const CVec y = A.center(cell_echo(gs.scene, sel, c, cell, exact));
            CHECK(max_diff(y, Ab) <= 1e-9);
        }
}

TEST_CASE("grid to physical conversion") {
    const SystemConfig c = make_cfg(32, 1, 3e8);
    CHECK(c.cell_width() == doctest::Approx(12.0));
    const int Q = c.Q();
    const RecoveredTarget t = grid_to_physical((0u * c.M + 4) * Q + 0, 3, c);
    CHECK(t.r == doctest::Approx(36.0));
    CHECK(grid_to_physical((16u * c.M + 0) * Q + 0, 0, c).v == doctest::Approx(0.0));
    CHECK(grid_to_physical((0u * c.M + 0) * Q + Q / 2, 0, c).theta == doctest::Approx(0.0));
    CHECK(grid_to_physical(5, 0, c).theta == doctest::Approx(std::asin(2.0 * (5.0 / 8 - 0.5))));
    CHECK(std::isnan(grid_to_physical(0, 0, c).theta) == false);   // sin = -1 is still visible
    CHECK_THROWS_AS(grid_to_physical(c.N * c.M * Q, 0, c), ValidationError);
}

TEST_CASE("grid round trip and aliasing") {
    const SystemConfig c = make_cfg(32, 1);
    const int Q = c.Q();
    for (int cell : {0, 1, 4})
        for (std::size_t flat = 1; flat < static_cast<std::size_t>(c.N) * c.M * Q; flat += 37) {
            if (flat % Q == 0) continue;
            const RecoveredTarget p = grid_to_physical(flat, cell, c);
            const GridCoord g = physical_to_grid(Target{p.r, p.v, p.theta, {1, 0}}, c);
            CHECK(g.flat == flat);
            CHECK(g.cell == cell);
            CHECK(std::abs(g.off_r) < 1e-9);
            CHECK(std::abs(g.off_v) < 1e-9);
            CHECK(std::abs(g.off_theta) < 1e-9);
            // one unambiguous range further out: same bin, next cell
            const GridCoord h = physical_to_grid(Target{p.r + c.cell_width(), p.v, p.theta, {1, 0}}, c);
            CHECK(h.flat == flat);
            CHECK(h.cell == cell + 1);
        }
}

TEST_CASE("omp: one noiseless target") {
    const SystemConfig c = make_cfg(16, 1);
    auto rng = stream_rng(5, 5, 5);
    const SelectionSequence sel = draw(c, 3);
    const Dictionary A(sel, c);
    const GridScene gs = random_grid_scene(c, 1, 2, rng);
    const CVec y = A.center(cell_echo(gs.scene, sel, c, 2, true));
    OmpOptions o;
    o.max_terms = 1;
    const OmpResult r = omp_recover(y, A, o);
    const SparseScene truth = SparseScene::from_dense(gs.b);
    REQUIRE(r.b.support == truth.support);
    CHECK(std::abs(r.b.values[0] - truth.values[0]) < 1e-9);
    CHECK(r.residual_norm < 1e-9);
}

TEST_CASE("omp: three-target scene with K = 2") {
    const SystemConfig c = make_cfg(32, 2);
    const Scene scene = snap_to_grid(fig5_scene(), c);
    const SelectionSequence sel = draw(c, 4);
    const Dictionary A(sel, c);
    std::map<int, Scene> by_cell;
    for (const auto& t : scene) by_cell[physical_to_grid(t, c).cell].push_back(t);
    for (const auto& [cell, targets] : by_cell) {
        const CVec y = A.center(cell_echo(targets, sel, c, cell, true));
        OmpOptions o;
        o.max_terms = static_cast<int>(targets.size());
        const OmpResult r = omp_recover(y, A, o);
        std::vector<std::size_t> want;
        for (const auto& t : targets) want.push_back(physical_to_grid(t, c).flat);
        std::sort(want.begin(), want.end());
        CHECK(r.b.support == want);
    }
}

TEST_CASE("omp: random small scenes") {
    const SystemConfig c = make_cfg(16, 2);
    int ok = 0;
    for (int trial = 0; trial < 100; ++trial) {
        auto rng = stream_rng(6, 6, trial);
        const SelectionSequence sel = random_selection_sequence(c, rng);
        const Dictionary A(sel, c);
        const GridScene gs = random_grid_scene(c, 1 + trial % 3, 1, rng);
        const CVec y = A.center(cell_echo(gs.scene, sel, c, 1, true));
        OmpOptions o;
        o.max_terms = static_cast<int>(gs.scene.size());
        const OmpResult r = omp_recover(y, A, o);
        if (r.b.support == SparseScene::from_dense(gs.b).support && r.residual_norm < 1e-8) ++ok;
    }
    CHECK(ok >= 99);
}

TEST_CASE("omp: residual stopping rule") {
    const SystemConfig c = make_cfg(16, 2);
    auto rng = stream_rng(7, 7, 7);
    const SelectionSequence sel = draw(c, 5);
    const Dictionary A(sel, c);
    const GridScene gs = random_grid_scene(c, 2, 0, rng);
    const CVec y = A.center(cell_echo(gs.scene, sel, c, 0, true));
    OmpOptions o;
    o.residual_tol = 1e-8;
    const OmpResult r = omp_recover(y, A, o);
    CHECK(r.b.support == SparseScene::from_dense(gs.b).support);
    CHECK_THROWS_AS(omp_recover(CVec(3), A, o), ValidationError);
}

TEST_CASE("bp: one noiseless target") {
    const SystemConfig c = make_cfg(16, 1);
    auto rng = stream_rng(8, 8, 8);
    const SelectionSequence sel = draw(c, 6);
    const Dictionary A(sel, c);
    const GridScene gs = random_grid_scene(c, 1, 0, rng);
    const CVec y = A.center(cell_echo(gs.scene, sel, c, 0, true));
    const BpResult r = bp_recover(y, A);
    CHECK(r.converged);
    CHECK(mean_l2_error(r.b, gs.b) <= 1e-4);
    CHECK(r.fit_residual < 1e-4);
}

TEST_CASE("bp and omp agree on small noiseless scenes") {
    const SystemConfig c = make_cfg(16, 2);
    for (int trial = 0; trial < 10; ++trial) {
        auto rng = stream_rng(9, 9, trial);
        const SelectionSequence sel = random_selection_sequence(c, rng);
        const Dictionary A(sel, c);
        const GridScene gs = random_grid_scene(c, 1 + trial % 3, 0, rng);
        const CVec y = A.center(cell_echo(gs.scene, sel, c, 0, true));
        OmpOptions o;
        o.max_terms = static_cast<int>(gs.scene.size());
        const OmpResult ro = omp_recover(y, A, o);
        const BpResult rb = bp_recover(y, A);
        CHECK(rb.converged);
        const SparseScene bs = SparseScene::from_dense(rb.b.dense(), 1e-3);
        CHECK(bs.support == ro.b.support);
    }
}

TEST_CASE("bp: exact answers far below the threshold") {
    // these draws include cases where plain ADMM stalls on a slowly rotating orbit
    const SystemConfig c = make_cfg(16, 1);
    for (int trial = 0; trial < 40; ++trial) {
        auto rng = stream_rng(11, 11, trial);
        const SelectionSequence sel = random_selection_sequence(c, rng);
        const Dictionary A(sel, c);
        const GridScene gs = random_grid_scene(c, 2, 0, rng);
        const CVec y = A.center(cell_echo(gs.scene, sel, c, 0, true));
        const BpResult r = bp_recover(y, A);
        CHECK(r.converged);
        CHECK(r.polished);
        CHECK(mean_l2_error(r.b, gs.b) < 1e-12);
    }
}

TEST_CASE("bp fails far above the threshold") {
    const SystemConfig c = make_cfg(16, 1);   // threshold near 6.5
    int failures = 0;
    const int trials = 50;
    for (int trial = 0; trial < trials; ++trial) {
        auto rng = stream_rng(10, 10, trial);
        const SelectionSequence sel = random_selection_sequence(c, rng);
        const Dictionary A(sel, c);
        const GridScene gs = random_grid_scene(c, 13, 0, rng);
        const CVec y = A.center(cell_echo(gs.scene, sel, c, 0, true));
        const BpResult r = bp_recover(y, A);
        if (mean_l2_error(r.b, gs.b) > 1e-4) ++failures;
    }
    CHECK(failures >= 45);
}

TEST_CASE("bp with a noise ball") {
    const SystemConfig c = make_cfg(16, 2);
    auto rng = stream_rng(11, 11, 11);
    const SelectionSequence sel = draw(c, 7);
    const Dictionary A(sel, c);
    const GridScene gs = random_grid_scene(c, 2, 0, rng);
    CVec y = A.center(cell_echo(gs.scene, sel, c, 0, true));
    const double sigma = 0.05;
    for (auto& v : y) v += complex_normal(rng, sigma * sigma);
    BpOptions o;
    o.epsilon = default_bp_epsilon(sigma, A.rows());
    const BpResult r = bp_recover(y, A, o);
    CHECK(r.converged);
    CHECK(r.fit_residual <= o.epsilon * 1.01);
    // the two largest entries sit on the true support
    const CVec d = r.b.dense();
    std::vector<std::size_t> idx(d.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + 2, idx.end(),
                      [&](std::size_t a, std::size_t b) { return std::abs(d[a]) > std::abs(d[b]); });
    std::vector<std::size_t> top{idx[0], idx[1]};
    std::sort(top.begin(), top.end());
    CHECK(top == SparseScene::from_dense(gs.b).support);
}

TEST_CASE("non-convergence is reported") {
    const SystemConfig c = make_cfg(16, 1);
    auto rng = stream_rng(12, 12, 12);
    const SelectionSequence sel = draw(c, 8);
    const Dictionary A(sel, c);
    const GridScene gs = random_grid_scene(c, 5, 0, rng);
    BpOptions o;
    o.max_iter = 3;
    const BpResult r = bp_recover(A.center(cell_echo(gs.scene, sel, c, 0, true)), A, o);
    CHECK_FALSE(r.converged);
    CHECK_THROWS_AS(require_converged(r), ConvergenceError);
}

TEST_CASE("epsilon default and error metric") {
    CHECK(default_bp_epsilon(1.0, 64) == doctest::Approx(8.0 * 1.25));
    SparseScene s;
    s.length = 4;
    s.support = {1};
    s.values = {cd(1, 0)};
    CHECK(mean_l2_error(s, CVec{0, 1, 0, 0}) == 0.0);
    CHECK(mean_l2_error(s, CVec{0, 0, 0, 0}) == doctest::Approx(0.25));
}
