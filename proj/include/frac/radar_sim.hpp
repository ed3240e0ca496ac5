#pragma once

#include <random>
#include <string>
#include <vector>

#include "frac/config.hpp"
#include "frac/im_codec.hpp"

namespace frac {

struct Target {
    double r = 0.0;       // m
    double v = 0.0;       // m/s
    double theta = 0.0;   // rad
    cd alpha{1.0, 0.0};
};

using Scene = std::vector<Target>;

// Normalised frequencies of a target relative to coarse cell g.
struct TargetFreqs {
    int cell;
    double f_r;       // 2 delta_r delta_f / c, in [-1/2, 1/2) for the home cell
    double f_v;       // 2 v T_0 f_c / c
    double f_theta;   // f_c d_R sin(theta) / c
    cd alpha_tilde;   // alpha e^{-j 2 pi 2 r f_c / c}
};

// Coarse cell index: floor(2 r delta_f / c + 1/2).
int coarse_cell(double r, const SystemConfig& cfg);
TargetFreqs target_freqs(const Target& t, const SystemConfig& cfg, int cell);
TargetFreqs target_freqs(const Target& t, const SystemConfig& cfg);

// Range / velocity / angle window checks. Returns a message per violation.
std::vector<std::string> check_target(const Target& t, const SystemConfig& cfg);
// Slow-target and narrowband assumptions of the sampled model.
std::vector<std::string> model_warnings(const Scene& scene, const SystemConfig& cfg);

// Samples indexed [((n*K + k)*Q_r + q_r)*len + s].
struct FastTimeCube {
    int N = 0, K = 0, Q_r = 0, G = 0;
    CVec data;
    SelectionSequence selections;
    double noise_variance = 0.0;  // per fast-time sample

    cd& at(int n, int k, int q, int g) { return data[((static_cast<std::size_t>(n) * K + k) * Q_r + q) * G + g]; }
    const cd& at(int n, int k, int q, int g) const {
        return data[((static_cast<std::size_t>(n) * K + k) * Q_r + q) * G + g];
    }
};

struct CrrpCube {
    int N = 0, K = 0, Q_r = 0, G = 0;
    CVec data;
    SelectionSequence selections;

    const cd& at(int n, int k, int q, int g) const {
        return data[((static_cast<std::size_t>(n) * K + k) * Q_r + q) * G + g];
    }
};

// One coarse cell, flattened with row index n*K*Q_r + k*Q_r + q_r.
struct CoarseCellSlice {
    int N = 0, K = 0, Q_r = 0;
    int cell = 0;
    CVec data;

    const cd& at(int n, int k, int q) const {
        return data[(static_cast<std::size_t>(n) * K + k) * Q_r + q];
    }
};

enum class NoiseDomain {
    kCompressed,   // fast-time variance sigma^2/G, so the cell-domain variance is sigma^2
    kFastTime,     // fast-time variance sigma^2
};

FastTimeCube simulate_fast_time(const Scene& scene, const SelectionSequence& sel, const SystemConfig& cfg,
                                double sigma_r, std::mt19937_64& rng,
                                NoiseDomain domain = NoiseDomain::kCompressed);

CrrpCube pulse_compress(const FastTimeCube& cube);

CoarseCellSlice extract_cell(const CrrpCube& crrp, int g);

enum class EchoGain {
    kNominal,      // beta = G * alpha_tilde
    kExactKernel,  // beta from the fast-time IDFT kernel at bin g (matches the full pipeline)
    kUnit,         // beta = alpha_tilde (pulse-compression gain removed)
};

struct CellSimOptions {
    EchoGain gain = EchoGain::kNominal;
    bool exact_xi = true;
    bool require_in_cell = true;
};

CoarseCellSlice simulate_cell_direct(const Scene& scene, const SelectionSequence& sel, const SystemConfig& cfg,
                                     double sigma_r, std::mt19937_64& rng, int g,
                                     const CellSimOptions& opt = {});

// sigma_r for a given radar SNR in dB with unit echo power: SNR = N K Q_r / sigma^2.
double radar_sigma_from_snr_db(const SystemConfig& cfg, double snr_db);

// Scene files: one target per line, "r_m, v_mps, theta_deg, abs_alpha, arg_alpha_rad"; '#' starts a comment.
Scene parse_scene(const std::string& text);
Scene load_scene(const std::string& path);
std::string format_scene(const Scene& scene);

// Little-endian dump: "FRACCUBE", u64 header length, JSON header, interleaved float64 re/im.
void write_cube(const std::string& path, const FastTimeCube& cube, const std::string& cfg_hash);
FastTimeCube read_cube(const std::string& path);

}  // namespace frac
