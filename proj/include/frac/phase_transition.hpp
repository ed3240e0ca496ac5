#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "frac/config.hpp"
#include "frac/im_codec.hpp"
#include "frac/radar_recovery.hpp"

namespace frac {

struct PtProblem {
    double n1;   // N K Q_r
    double n2;   // N M P Q_r

    static PtProblem from_config(const SystemConfig& cfg);
};

struct PtSolution {
    double l_star = 0.0;
    double beta_star = 0.0;
    std::string method;   // "exact" or "approx"
    int iterations = 0;
    bool warn_small_ratio = false;   // n2 / L* < 20
};

// Integral of (u - beta)^2 u e^{-u^2/2} over [beta, inf), adaptive Gauss-Kronrod.
double pt_integral(double beta);
// 2 e^{-beta^2/2} - sqrt(2 pi) beta erfc(beta / sqrt 2).
double pt_integral_closed_form(double beta);

// inf over beta of (L (2 + beta^2) + (n2 - L) pt_integral(beta)) / 2, and the minimiser.
std::pair<double, double> pt_objective(double L, double n2);

PtSolution solve_threshold(const PtProblem& p);
PtSolution approx_threshold(const PtProblem& p);
PtSolution approx_threshold(const SystemConfig& cfg);

struct PtPoint {
    int L;
    int successes;
    int trials;
    int nonconverged;
    double probability() const { return trials ? static_cast<double>(successes) / trials : 0.0; }
};

struct PtCurve {
    std::vector<PtPoint> points;
    double crossing = 0.0;   // NaN when the curve never crosses the level
};

struct PtEmpiricalOptions {
    int trials = 200;
    std::uint64_t seed = 1;
    int workers = 1;
    double success_tol = 1e-4;   // mean l2 error
    double level = 0.6;
    bool exact_xi = true;
    SelectionMode mode = SelectionMode::kUniform;
    BpOptions bp;
};

PtCurve empirical_transition(const SystemConfig& cfg, const std::vector<int>& target_counts,
                             const PtEmpiricalOptions& opt);

// Linear interpolation at the first downward crossing of `level`.
double find_crossing(const std::vector<PtPoint>& pts, double level);

}  // namespace frac
