#include "frac/phase_transition.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "frac/parallel.hpp"
#include "frac/rng.hpp"

namespace frac {

PtProblem PtProblem::from_config(const SystemConfig& cfg) {
    return {static_cast<double>(cfg.N) * cfg.K * cfg.Q_r, static_cast<double>(cfg.N) * cfg.M * cfg.P * cfg.Q_r};
}

namespace {

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
constexpr std::array<double, 8> kXk = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                       0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                       0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                       0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWk = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                       0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                       0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                       0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                       0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
std::pair<double, double> gk15(F&& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double fc = f(c);
    double k = fc * kWk[7], g = fc * kWg[3];
    for (int i = 0; i < 7; ++i) {
        const double x = h * kXk[i];
        const double s = f(c - x) + f(c + x);
        k += kWk[i] * s;
        if (i % 2 == 1) g += kWg[i / 2] * s;
    }
    return {k * h, std::abs((k - g) * h)};
}

template <class F>
double adaptive(F&& f, double a, double b, double tol, int depth) {
    const auto [v, err] = gk15(f, a, b);
    if (err <= tol || depth == 0) return v;
    const double m = 0.5 * (a + b);
    return adaptive(f, a, m, 0.5 * tol, depth - 1) + adaptive(f, m, b, 0.5 * tol, depth - 1);
}

}  // namespace

double pt_integral(double beta) {
    if (!(beta >= 0.0)) throw ValidationError("beta must be non-negative");
    auto f = [beta](double u) {
        const double d = u - beta;
        return d * d * u * std::exp(-0.5 * u * u);
    };
    // integrand is below 1e-300 past beta + 40; split so each panel sees the peak region
    double total = 0.0;
    const double edges[] = {0.0, 2.0, 5.0, 10.0, 20.0, 40.0};
    for (int i = 0; i + 1 < 6; ++i) total += adaptive(f, beta + edges[i], beta + edges[i + 1], 2e-12, 30);
    return total;
}

double pt_integral_closed_form(double beta) {
    return 2.0 * std::exp(-0.5 * beta * beta) - std::sqrt(kTwoPi) * beta * std::erfc(beta / std::sqrt(2.0));
}

std::pair<double, double> pt_objective(double L, double n2) {
    auto obj = [&](double b) { return 0.5 * (L * (2.0 + b * b) + (n2 - L) * pt_integral(b)); };
    // golden-section on [0, 20]
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0, b = 20.0;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = obj(c), fd = obj(d);
    while (b - a > 1e-8) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = obj(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = obj(d);
        }
    }
    const double bs = 0.5 * (a + b);
    double best = obj(bs), arg = bs;
    // the infimum may sit on the boundary
    if (const double f0 = obj(0.0); f0 < best) {
        best = f0;
        arg = 0.0;
    }
    return {best, arg};
}

PtSolution solve_threshold(const PtProblem& p) {
    if (!(p.n1 >= 1.0) || !(p.n2 >= p.n1)) throw ValidationError("need 1 <= n1 <= n2");
    double lo = 0.0, hi = p.n1;
    if (pt_objective(hi, p.n2).first < p.n1) throw ConvergenceError("no bracket for the threshold");
    PtSolution s;
    s.method = "exact";
    while (hi - lo > 1e-9 * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        (pt_objective(mid, p.n2).first < p.n1 ? lo : hi) = mid;
        ++s.iterations;
    }
    s.l_star = 0.5 * (lo + hi);
    s.beta_star = pt_objective(s.l_star, p.n2).second;
    s.warn_small_ratio = p.n2 / s.l_star < 20.0;
    return s;
}

PtSolution approx_threshold(const PtProblem& p) {
    if (!(p.n1 >= 1.0) || !(p.n2 >= p.n1)) throw ValidationError("need 1 <= n1 <= n2");
    PtSolution s;
    s.method = "approx";
    double b2 = std::log(p.n2);
    double L = p.n1 / (2.0 + b2 / 2.0);
    for (int it = 1; it <= 1000; ++it) {
        // solve ln(b2 + 1) + b2/2 = ln((n2 - L)/L) for b2 >= 0; the left side is increasing
        const double rhs = std::log((p.n2 - L) / L);
        double lo = 0.0, hi = std::max(1.0, 2.0 * rhs);
        while (std::log(hi + 1.0) + hi / 2.0 < rhs) hi *= 2.0;
        if (rhs <= 0.0) hi = 0.0;
        for (int k = 0; k < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++k) {
            const double mid = 0.5 * (lo + hi);
            (std::log(mid + 1.0) + mid / 2.0 < rhs ? lo : hi) = mid;
        }
        b2 = 0.5 * (lo + hi);
        const double Ln = p.n1 / (2.0 + b2 / 2.0);
        s.iterations = it;
        if (std::abs(Ln - L) < 1e-6) {
            L = Ln;
            s.l_star = L;
            s.beta_star = std::sqrt(b2);
            s.warn_small_ratio = p.n2 / L < 20.0;
            return s;
        }
        L = Ln;
    }
    throw ConvergenceError("approximate threshold iteration did not converge in 1000 steps");
}

PtSolution approx_threshold(const SystemConfig& cfg) { return approx_threshold(PtProblem::from_config(cfg)); }

double find_crossing(const std::vector<PtPoint>& pts, double level) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double p = pts[i].probability();
        if (p < level) {
            if (i == 0) return std::nan("");
            const double p0 = pts[i - 1].probability();
            const double L0 = pts[i - 1].L, L1 = pts[i].L;
            return L0 + (p0 - level) / (p0 - p) * (L1 - L0);
        }
    }
    return std::nan("");
}

PtCurve empirical_transition(const SystemConfig& cfg, const std::vector<int>& target_counts,
                             const PtEmpiricalOptions& opt) {
    if (opt.trials < 1) throw ValidationError("trial count must be positive");
    const std::size_t n2 = static_cast<std::size_t>(cfg.N) * cfg.M * cfg.Q();
    for (int L : target_counts)
        if (L < 1 || static_cast<std::size_t>(L) > n2) throw ValidationError("target count out of range");

    struct Outcome {
        char ok = 0;
        char conv = 0;
    };
    const std::size_t per = static_cast<std::size_t>(opt.trials);
    const std::size_t total = per * target_counts.size();
    auto res = parallel_map<Outcome>(total, opt.workers, [&](std::size_t idx) {
        const int L = target_counts[idx / per];
        const std::uint64_t trial = idx % per;
        auto rng = stream_rng(opt.seed, 0x9700 + static_cast<std::uint64_t>(L), trial);
        const auto sel = random_selection_sequence(cfg, rng, opt.mode);
        Dictionary A(sel, cfg, opt.exact_xi);
        // L distinct grid points, unit magnitude, uniform phase
        std::vector<std::size_t> pool(n2);
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        CVec b(n2, cd{});
        std::uniform_real_distribution<double> ph(0.0, 1.0);
        for (int l = 0; l < L; ++l) {
            std::uniform_int_distribution<std::size_t> d(static_cast<std::size_t>(l), n2 - 1);
            std::swap(pool[l], pool[d(rng)]);
            b[pool[l]] = cis_turns(ph(rng));
        }
        CVec y(A.rows());
        A.apply(b.data(), y.data());
        const BpResult r = bp_recover(y, A, opt.bp);
        Outcome o;
        o.conv = r.converged;
        o.ok = mean_l2_error(r.b, b) <= opt.success_tol;
        return o;
    });
    PtCurve curve;
    for (std::size_t i = 0; i < target_counts.size(); ++i) {
        PtPoint p{target_counts[i], 0, opt.trials, 0};
        for (std::size_t t = 0; t < per; ++t) {
            p.successes += res[i * per + t].ok;
            p.nonconverged += !res[i * per + t].conv;
        }
        curve.points.push_back(p);
    }
    curve.crossing = find_crossing(curve.points, opt.level);
    return curve;
}

}  // namespace frac
