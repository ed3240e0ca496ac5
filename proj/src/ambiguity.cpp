#include "frac/ambiguity.hpp"

#include <cmath>

#include "frac/parallel.hpp"
#include "frac/rng.hpp"

namespace frac {

double dirichlet(int L, double x) {
    const double s = std::sin(kPi * x);
    if (std::abs(s) < 1e-12) {
        const long k = std::lround(x);
        return ((k * (L - 1)) % 2 == 0) ? L : -L;
    }
    return std::sin(L * kPi * x) / s;
}

cd instantaneous_af(const SelectionSequence& sel, int Q_r, const AfQuery& q) {
    // receive-element sum is common to every (n, k)
    cd rx{};
    for (int r = 0; r < Q_r; ++r) rx += cis_turns(-r * q.d_theta);
    cd total{};
    for (std::size_t n = 0; n < sel.size(); ++n) {
        cd pulse{};
        const auto& s = sel[n];
        for (std::size_t k = 0; k < s.carriers.size(); ++k)
            pulse += cis_turns(-s.carriers[k] * q.d_r - static_cast<double>(Q_r) * s.antennas[k] * q.d_theta);
        total += pulse * cis_turns(-static_cast<double>(n) * q.d_v);
    }
    return total * rx;
}

double expected_af(const SystemConfig& cfg, const AfQuery& q) {
    const double scale = static_cast<double>(cfg.K) / (static_cast<double>(cfg.M) * cfg.P);
    return scale * std::abs(dirichlet(cfg.M, q.d_r)) * std::abs(dirichlet(cfg.N, q.d_v)) *
           std::abs(dirichlet(cfg.P * cfg.Q_r, q.d_theta));
}

Resolutions resolutions(const SystemConfig& cfg) {
    Resolutions r;
    r.range = cfg.c / (2.0 * cfg.M * cfg.delta_f);
    r.velocity = cfg.lambda / (2.0 * cfg.N * cfg.T_0);
    r.angle = std::asin(std::min(1.0, cfg.lambda / (cfg.P * cfg.Q_r * cfg.d_R)));
    return r;
}

AfAverage monte_carlo_af(const SystemConfig& cfg, const std::vector<AfQuery>& queries, int cpis,
                         std::uint64_t seed, SelectionMode mode, int workers) {
    if (cpis < 1) throw ValidationError("need at least one CPI");
    struct Partial {
        std::vector<cd> sum;
        std::vector<double> sum_abs;
    };
    // fixed-size blocks so the reduction order does not depend on the worker count
    const int block = 64;
    const int nblocks = (cpis + block - 1) / block;
    auto parts = parallel_map<Partial>(static_cast<std::size_t>(nblocks), workers, [&](std::size_t b) {
        Partial p{std::vector<cd>(queries.size()), std::vector<double>(queries.size())};
        const int lo = static_cast<int>(b) * block;
        const int hi = std::min(cpis, lo + block);
        for (int t = lo; t < hi; ++t) {
            auto rng = stream_rng(seed, 0xaf, static_cast<std::uint64_t>(t));
            const auto sel = random_selection_sequence(cfg, rng, mode);
            for (std::size_t i = 0; i < queries.size(); ++i) {
                const cd v = instantaneous_af(sel, cfg.Q_r, queries[i]);
                p.sum[i] += v;
                p.sum_abs[i] += std::abs(v);
            }
        }
        return p;
    });
    AfAverage out{std::vector<cd>(queries.size()), std::vector<double>(queries.size())};
    for (const auto& p : parts)
        for (std::size_t i = 0; i < queries.size(); ++i) {
            out.mean[i] += p.sum[i];
            out.mean_abs[i] += p.sum_abs[i];
        }
    for (std::size_t i = 0; i < queries.size(); ++i) {
        out.mean[i] /= static_cast<double>(cpis);
        out.mean_abs[i] /= static_cast<double>(cpis);
    }
    return out;
}

std::vector<AfGridPoint> af_plane(const SystemConfig& cfg, const SelectionSequence* sel, AfPlane plane, int grid,
                                  int workers) {
    if (grid < 1) throw ValidationError("grid must be positive");
    auto rows = parallel_map<std::vector<AfGridPoint>>(static_cast<std::size_t>(grid), workers, [&](std::size_t i) {
        std::vector<AfGridPoint> row;
        row.reserve(grid);
        const double a = -0.5 + static_cast<double>(i) / grid;
        for (int j = 0; j < grid; ++j) {
            const double b = -0.5 + static_cast<double>(j) / grid;
            AfQuery q;
            if (plane == AfPlane::kRangeAngle) q.d_r = a;
            else q.d_v = a;
            q.d_theta = b;
            const double mag = sel ? std::abs(instantaneous_af(*sel, cfg.Q_r, q)) : expected_af(cfg, q);
            row.push_back({a, b, mag});
        }
        return row;
    });
    std::vector<AfGridPoint> out;
    out.reserve(static_cast<std::size_t>(grid) * grid);
    for (auto& r : rows) out.insert(out.end(), r.begin(), r.end());
    return out;
}

}  // namespace frac
