#pragma once

#include <optional>
#include <string>

#include "frac/common.hpp"

namespace frac {

// User-facing parameters. Optional fields are derived when absent.
struct RawParams {
    int N = 32;
    int M = 8;
    int K = 1;
    int P = 4;
    int Q_r = 2;
    int Q_c = 4;
    int J = 2;
    int I = 8;                       // channel taps
    double f_c = 77e9;
    double B = 100e6;
    double T_0 = 60.88e-6;
    double T_p = 50e-6;
    std::optional<double> r_max;      // one of r_max / F_s_radar drives the other
    std::optional<double> F_s_radar = 416.68e3;
    std::optional<double> d_R;        // lambda/2
    std::optional<double> F_s_comm;   // B
    double c = kSpeedOfLight;
    std::uint64_t seed = 1;

    bool operator==(const RawParams&) const = default;
};

struct BitBudget {
    int n_carrier = 0;   // floor(log2 C(M,K))
    int n_antenna = 0;   // floor(log2 C(P,K))
    int n_perm = 0;      // floor(log2 K!)
    int n_pm = 0;
    int n_im = 0;
    int n_total = 0;

    bool operator==(const BitBudget&) const = default;
};

struct SystemConfig {
    RawParams raw;

    int N, M, K, P, Q_r, Q_c, J, I;
    double f_c, B, T_0, T_p, c;
    double delta_f;    // = B_sub = B/M
    double kappa;      // chirp rate B_sub/T_p
    double lambda;
    double d_R, d_T;
    double r_max;
    double F_s_radar, T_s_radar;
    int G;
    double F_s_comm, T_s_comm;
    int U;
    std::uint64_t seed;

    int Q() const { return P * Q_r; }
    // Width of one coarse range cell, c/(2 delta_f).
    double cell_width() const { return c / (2.0 * delta_f); }
    double xi(int m) const { return (f_c + m * delta_f) / f_c; }

    bool operator==(const SystemConfig&) const = default;
};

SystemConfig derive(const RawParams& raw);

BitBudget bit_budget(int M, int K, int P, int J);
BitBudget bit_budget(const SystemConfig& cfg);

// Exact binomial coefficient; throws ValidationError on 64-bit overflow.
std::uint64_t binomial(int n, int k);
std::uint64_t factorial(int n);

// floor(log2 x) for x >= 1.
int floor_log2(std::uint64_t x);

RawParams table1_params();

// JSON round trip. Unknown keys are rejected.
RawParams params_from_json(const std::string& text);
std::string params_to_json(const RawParams& raw);
RawParams load_params(const std::string& path);

// Stable 64-bit hash of the canonical JSON form, hex encoded.
std::string config_hash(const RawParams& raw);

const char* version_string();

}  // namespace frac
