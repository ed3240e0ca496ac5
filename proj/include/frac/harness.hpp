#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "frac/config.hpp"
#include "frac/im_codec.hpp"
#include "frac/radar_recovery.hpp"
#include "frac/radar_sim.hpp"

namespace frac {

enum class ExperimentKind {
    kHitRate,
    kRecoveryMap,
    kAmbiguity,
    kPtTheory,
    kPtEmpirical,
    kCommBer,
    kCommRate,
    kHwReport,
    kResolutionReport,
};

const char* experiment_name(ExperimentKind k);

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::kHitRate;
    RawParams params;
    std::vector<double> snr_db;
    std::vector<int> K_list;
    std::vector<int> M_list;
    std::vector<int> L_list;
    int trials = 1;
    std::uint64_t seed = 1;
    std::string out;
    int workers = 1;

    void validate() const;
};

// "a:step:b" (inclusive) or "a,b,c".
std::vector<double> parse_sweep(const std::string& s);
std::vector<int> parse_int_list(const std::string& s);

// The three-target scene used for the recovery figure.
Scene fig5_scene();
// Moves every target onto its nearest grid point.
Scene snap_to_grid(const Scene& scene, const SystemConfig& cfg);

enum class RadarSolver { kOmp, kBp };

struct HitRateOptions {
    std::vector<double> snr_db;
    int trials = 2000;
    std::uint64_t seed = 1;
    int workers = 1;
    bool random_scene = false;   // fresh on-grid scene per trial
    int random_targets = 3;
    Scene scene = fig5_scene();
    bool snap = true;
    SelectionMode mode = SelectionMode::kUniform;
    RadarSolver solver = RadarSolver::kOmp;
    bool exact_xi = true;
    int bp_max_iter = 20000;   // a trial that runs out counts as a miss
};

struct HitRatePoint {
    double snr_db;
    int hits;
    int trials;
    double probability;
    double ci_low, ci_high;   // Wilson 95%
    double stderr_;
};

struct HitRateResult {
    std::vector<HitRatePoint> points;
};

HitRateResult run_hit_rate(const SystemConfig& cfg, const HitRateOptions& opt);

struct RecoveryRow {
    bool truth;
    double r, v, theta, abs_beta, arg_beta;
    std::size_t flat;
    int cell;
};

struct RecoveryMapOptions {
    Scene scene = fig5_scene();
    bool snap = true;
    double snr_db = 1e9;   // noiseless by default
    std::uint64_t seed = 1;
    RadarSolver solver = RadarSolver::kOmp;
    bool exact_xi = true;
    int bp_max_iter = 20000;   // running out throws ConvergenceError
};

std::vector<RecoveryRow> run_recovery_map(const SystemConfig& cfg, const RecoveryMapOptions& opt);

struct HwColumn {
    std::string system;
    int rf_modules;
    double sampling_rate;
    double samples_per_pulse;
};

struct HwReport {
    std::vector<HwColumn> columns;
    std::vector<std::string> notes;
};

HwReport report_hw(const SystemConfig& cfg);

struct ResolutionRow {
    double range_m, velocity_mps, angle_deg;
};

ResolutionRow resolution_report(const SystemConfig& cfg);

// One-parameter variations of the defaults used for threshold tables: (label, params).
std::vector<std::pair<std::string, RawParams>> table3_columns();

// CSV preamble: "# frac <version> config=<hash> <extra>".
void write_csv_preamble(std::ostream& os, const RawParams& params, const std::string& experiment);

double wilson_low(int k, int n, double z = 1.96);
double wilson_high(int k, int n, double z = 1.96);

}  // namespace frac
