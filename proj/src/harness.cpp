#include "frac/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "frac/ambiguity.hpp"
#include "frac/parallel.hpp"
#include "frac/rng.hpp"

namespace frac {

const char* experiment_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::kHitRate: return "hit_rate";
        case ExperimentKind::kRecoveryMap: return "recovery_map";
        case ExperimentKind::kAmbiguity: return "ambiguity";
        case ExperimentKind::kPtTheory: return "pt_theory";
        case ExperimentKind::kPtEmpirical: return "pt_empirical";
        case ExperimentKind::kCommBer: return "comm_ber";
        case ExperimentKind::kCommRate: return "comm_rate";
        case ExperimentKind::kHwReport: return "hw_report";
        case ExperimentKind::kResolutionReport: return "resolution_report";
    }
    return "unknown";
}

void ExperimentSpec::validate() const {
    if (trials < 1) throw ValidationError("trial count must be >= 1");
    if (workers < 1) throw ValidationError("worker count must be >= 1");
    const bool needs_snr = kind == ExperimentKind::kHitRate || kind == ExperimentKind::kCommBer ||
                           kind == ExperimentKind::kCommRate;
    if (needs_snr && snr_db.empty()) throw ValidationError("SNR sweep is empty");
    if (kind == ExperimentKind::kPtEmpirical && L_list.empty()) throw ValidationError("target-count sweep is empty");
    (void)derive(params);
}

std::vector<double> parse_sweep(const std::string& s) {
    std::vector<double> out;
    auto num = [&](const std::string& t) {
        std::size_t pos = 0;
        double v;
        try {
            v = std::stod(t, &pos);
        } catch (const std::exception&) {
            throw ValidationError("bad number in sweep: " + t);
        }
        if (pos != t.size()) throw ValidationError("bad number in sweep: " + t);
        return v;
    };
    if (s.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(s);
        std::string p;
        while (std::getline(ss, p, ':')) parts.push_back(p);
        if (parts.size() != 3) throw ValidationError("range sweep must be start:step:stop");
        const double a = num(parts[0]), st = num(parts[1]), b = num(parts[2]);
        if (!(st > 0.0) || b < a) throw ValidationError("range sweep needs step > 0 and stop >= start");
        const long n = std::lround(std::floor((b - a) / st + 1e-9));
        for (long i = 0; i <= n; ++i) out.push_back(a + st * static_cast<double>(i));
    } else {
        std::stringstream ss(s);
        std::string p;
        while (std::getline(ss, p, ',')) {
            if (!p.empty()) out.push_back(num(p));
        }
    }
    if (out.empty()) throw ValidationError("empty sweep");
    return out;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    for (double d : parse_sweep(s)) {
        if (d != std::floor(d)) throw ValidationError("expected integers in list");
        out.push_back(static_cast<int>(d));
    }
    return out;
}

Scene fig5_scene() {
    const double deg = kPi / 180.0;
    return {
        {4.5, 1.0, 0.0, {1.0, 0.0}},
        {4.5, 1.0, 14.48 * deg, {1.0, 0.0}},
        {6.0, 2.0, 14.48 * deg, {1.0, 0.0}},
    };
}

Scene snap_to_grid(const Scene& scene, const SystemConfig& cfg) {
    Scene out;
    for (const auto& t : scene) out.push_back(grid_target(physical_to_grid(t, cfg), cfg, t.alpha));
    return out;
}

double wilson_low(int k, int n, double z) {
    if (n == 0) return 0.0;
    const double p = static_cast<double>(k) / n, z2 = z * z;
    const double c = (p + z2 / (2 * n)) / (1 + z2 / n);
    const double h = z * std::sqrt(p * (1 - p) / n + z2 / (4.0 * n * n)) / (1 + z2 / n);
    return std::max(0.0, c - h);
}

double wilson_high(int k, int n, double z) {
    if (n == 0) return 1.0;
    const double p = static_cast<double>(k) / n, z2 = z * z;
    const double c = (p + z2 / (2 * n)) / (1 + z2 / n);
    const double h = z * std::sqrt(p * (1 - p) / n + z2 / (4.0 * n * n)) / (1 + z2 / n);
    return std::min(1.0, c + h);
}

namespace {

struct CellGroup {
    int cell;
    Scene targets;
    std::set<std::size_t> truth;
};

std::vector<CellGroup> group_by_cell(const Scene& scene, const SystemConfig& cfg) {
    std::map<int, CellGroup> m;
    for (const auto& t : scene) {
        const GridCoord g = physical_to_grid(t, cfg);
        auto& grp = m[g.cell];
        grp.cell = g.cell;
        grp.targets.push_back(t);
        grp.truth.insert(g.flat);
    }
    std::vector<CellGroup> out;
    for (auto& [k, v] : m) out.push_back(std::move(v));
    return out;
}

void check_scene(const Scene& scene, const SystemConfig& cfg) {
    for (const auto& t : scene) {
        const auto bad = check_target(t, cfg);
        if (!bad.empty()) throw ValidationError("infeasible scene: " + bad.front());
    }
}

SparseScene recover(const CVec& y, const Dictionary& A, int L, RadarSolver solver, double sigma, int bp_max_iter,
                    bool strict) {
    if (solver == RadarSolver::kOmp) return omp_recover(y, A, OmpOptions{L, 0.0}).b;
    BpOptions o;
    o.epsilon = default_bp_epsilon(sigma, A.rows());
    o.max_iter = bp_max_iter;
    const BpResult r = bp_recover(y, A, o);
    if (strict) require_converged(r);
    // keep the L strongest coefficients so the hit test compares like with like
    std::vector<std::size_t> idx(r.b.support.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return std::abs(r.b.values[a]) > std::abs(r.b.values[b]); });
    idx.resize(std::min<std::size_t>(idx.size(), static_cast<std::size_t>(L)));
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return r.b.support[a] < r.b.support[b]; });
    SparseScene s;
    s.length = r.b.length;
    for (std::size_t i : idx) {
        s.support.push_back(r.b.support[i]);
        s.values.push_back(r.b.values[i]);
    }
    return s;
}

Scene random_grid_scene(const SystemConfig& cfg, int L, std::mt19937_64& rng) {
    const int Q = cfg.Q();
    const std::size_t n2 = static_cast<std::size_t>(cfg.N) * cfg.M * Q;
    if (L < 1 || static_cast<std::size_t>(L) > n2) throw ValidationError("random target count out of range");
    const int cells = std::max(1, static_cast<int>(std::floor(cfg.r_max / cfg.cell_width())) - 1);
    std::uniform_int_distribution<int> cd_(1, cells);
    const int cell = cells > 1 ? cd_(rng) : 0;
    std::set<std::size_t> used;
    std::uniform_int_distribution<std::size_t> pick(0, n2 - 1);
    std::uniform_real_distribution<double> ph(0.0, 1.0);
    Scene s;
    while (static_cast<int>(s.size()) < L) {
        const std::size_t f = pick(rng);
        const RecoveredTarget p = grid_to_physical(f, cell, cfg);
        if (std::isnan(p.theta) || !used.insert(f).second) continue;
        s.push_back(Target{p.r, p.v, p.theta, cis_turns(ph(rng))});
    }
    return s;
}

}  // namespace

HitRateResult run_hit_rate(const SystemConfig& cfg, const HitRateOptions& opt) {
    if (opt.trials < 1) throw ValidationError("trial count must be >= 1");
    if (opt.snr_db.empty()) throw ValidationError("SNR sweep is empty");
    Scene fixed;
    if (!opt.random_scene) {
        fixed = opt.snap ? snap_to_grid(opt.scene, cfg) : opt.scene;
        check_scene(fixed, cfg);
    }
    const std::size_t S = opt.snr_db.size();
    std::vector<double> sigma(S);
    for (std::size_t s = 0; s < S; ++s) sigma[s] = radar_sigma_from_snr_db(cfg, opt.snr_db[s]);

    auto hits = parallel_map<std::vector<char>>(static_cast<std::size_t>(opt.trials), opt.workers, [&](std::size_t t) {
        auto rng = stream_rng(opt.seed, 0x417, t);
        const auto sel = random_selection_sequence(cfg, rng, opt.mode);
        const Scene scene = opt.random_scene ? random_grid_scene(cfg, opt.random_targets, rng) : fixed;
        const Dictionary A(sel, cfg, opt.exact_xi);
        const auto groups = group_by_cell(scene, cfg);
        CellSimOptions so;
        so.gain = EchoGain::kUnit;
        so.exact_xi = opt.exact_xi;
        std::vector<CVec> clean, noise;
        for (const auto& g : groups) {
            clean.push_back(simulate_cell_direct(g.targets, sel, cfg, 0.0, rng, g.cell, so).data);
            CVec w(A.rows());
            for (auto& x : w) x = complex_normal(rng, 1.0);
            noise.push_back(std::move(w));
        }
        std::vector<char> ok(S, 1);
        for (std::size_t s = 0; s < S; ++s) {
            for (std::size_t gi = 0; gi < groups.size() && ok[s]; ++gi) {
                CVec y = clean[gi];
                for (std::size_t i = 0; i < y.size(); ++i) y[i] += sigma[s] * noise[gi][i];
                const SparseScene b =
                    recover(A.center(y), A, static_cast<int>(groups[gi].truth.size()), opt.solver, sigma[s],
                            opt.bp_max_iter, false);
                const std::set<std::size_t> got(b.support.begin(), b.support.end());
                ok[s] = got == groups[gi].truth;
            }
        }
        return ok;
    });

    HitRateResult res;
    for (std::size_t s = 0; s < S; ++s) {
        int k = 0;
        for (const auto& h : hits) k += h[s];
        const double p = static_cast<double>(k) / opt.trials;
        res.points.push_back({opt.snr_db[s], k, opt.trials, p, wilson_low(k, opt.trials), wilson_high(k, opt.trials),
                              std::sqrt(p * (1 - p) / opt.trials)});
    }
    return res;
}

std::vector<RecoveryRow> run_recovery_map(const SystemConfig& cfg, const RecoveryMapOptions& opt) {
    const Scene scene = opt.snap ? snap_to_grid(opt.scene, cfg) : opt.scene;
    check_scene(scene, cfg);
    auto rng = stream_rng(opt.seed, 0x3a9, 0);
    const auto sel = random_selection_sequence(cfg, rng);
    const Dictionary A(sel, cfg, opt.exact_xi);
    const double sigma = opt.snr_db >= 1e8 ? 0.0 : radar_sigma_from_snr_db(cfg, opt.snr_db);
    std::vector<RecoveryRow> rows;
    CellSimOptions so;
    so.gain = EchoGain::kUnit;
    so.exact_xi = opt.exact_xi;
    for (const auto& g : group_by_cell(scene, cfg)) {
        for (const auto& t : g.targets) {
            const GridCoord gc = physical_to_grid(t, cfg);
            rows.push_back({true, t.r, t.v, t.theta, std::abs(t.alpha), std::arg(t.alpha), gc.flat, gc.cell});
        }
        const auto slice = simulate_cell_direct(g.targets, sel, cfg, sigma, rng, g.cell, so);
        const SparseScene b = recover(A.center(slice), A, static_cast<int>(g.targets.size()), opt.solver, sigma,
                                       opt.bp_max_iter, true);
        for (std::size_t i = 0; i < b.support.size(); ++i) {
            const RecoveredTarget p = grid_to_physical(b.support[i], g.cell, cfg, b.values[i]);
            rows.push_back({false, p.r, p.v, p.theta, std::abs(p.beta), std::arg(p.beta), p.flat, p.cell});
        }
    }
    return rows;
}

HwReport report_hw(const SystemConfig& cfg) {
    HwReport r;
    const double fs = 2.0 * cfg.r_max * cfg.delta_f / (cfg.c * cfg.T_0);
    const double fs_wide = 2.0 * cfg.r_max * cfg.M * cfg.delta_f / (cfg.c * cfg.T_0);
    r.columns.push_back({"frac", cfg.K + cfg.Q_r, fs, cfg.K * cfg.Q_r * cfg.T_0 * fs});
    r.columns.push_back({"wideband", cfg.P * cfg.Q_r, fs_wide, cfg.P * cfg.Q_r * cfg.T_0 * fs_wide});
    std::ostringstream os;
    os.precision(6);
    os << "inputs: K=" << cfg.K << " Q_r=" << cfg.Q_r << " P=" << cfg.P << " M=" << cfg.M << " B_sub=" << cfg.delta_f
       << " Hz T_0=" << cfg.T_0 << " s T_p=" << cfg.T_p << " s r_max=" << cfg.r_max << " m";
    r.notes.push_back(os.str());
    r.notes.push_back("rf_modules: frac = K + Q_r; wideband = P*Q_r");
    r.notes.push_back("sampling_rate: 2*r_max*bandwidth/(c*T_0) with bandwidth B_sub (frac) or M*B_sub (wideband)");
    r.notes.push_back("samples_per_pulse: channels * T_0 * sampling_rate");
    std::ostringstream alt;
    alt.precision(6);
    alt << "with T_p instead of T_0 the frac count is " << cfg.K * cfg.Q_r * cfg.T_p * fs
        << "; the wideband rate at r_max = 250 m is " << 2.0 * 250.0 * cfg.M * cfg.delta_f / (cfg.c * cfg.T_0)
        << " Hz";
    r.notes.push_back(alt.str());
    std::ostringstream ratio;
    ratio << "sample ratio wideband/frac = P*M/K = " << static_cast<double>(cfg.P) * cfg.M / cfg.K;
    r.notes.push_back(ratio.str());
    return r;
}

ResolutionRow resolution_report(const SystemConfig& cfg) {
    const Resolutions r = resolutions(cfg);
    return {r.range, r.velocity, r.angle * 180.0 / kPi};
}

std::vector<std::pair<std::string, RawParams>> table3_columns() {
    std::vector<std::pair<std::string, RawParams>> cols;
    const RawParams base = table1_params();
    auto with = [&](const char* label, auto fn) {
        RawParams p = base;
        fn(p);
        cols.emplace_back(label, p);
    };
    with("base", [](RawParams&) {});
    with("K=2", [](RawParams& p) { p.K = 2; });
    with("M=4", [](RawParams& p) { p.M = 4; });
    with("M=16", [](RawParams& p) { p.M = 16; });
    with("P=2", [](RawParams& p) { p.P = 2; });
    with("P=8", [](RawParams& p) { p.P = 8; });
    with("N=16", [](RawParams& p) { p.N = 16; });
    with("N=24", [](RawParams& p) { p.N = 24; });
    return cols;
}

void write_csv_preamble(std::ostream& os, const RawParams& params, const std::string& experiment) {
    os << "# frac " << version_string() << " config=" << config_hash(params) << " experiment=" << experiment << "\n";
}

}  // namespace frac
