#pragma once

#include <cstdint>
#include <vector>

#include "frac/config.hpp"
#include "frac/im_codec.hpp"

namespace frac {

struct AfQuery {
    double d_r = 0.0;
    double d_v = 0.0;
    double d_theta = 0.0;
};

// sin(L pi x) / sin(pi x), with the removable singularity filled in.
double dirichlet(int L, double x);

cd instantaneous_af(const SelectionSequence& sel, int Q_r, const AfQuery& q);
double expected_af(const SystemConfig& cfg, const AfQuery& q);

struct Resolutions {
    double range;     // m
    double velocity;  // m/s
    double angle;     // rad
};

Resolutions resolutions(const SystemConfig& cfg);

// Averages of the random AF over independent CPIs.
struct AfAverage {
    std::vector<cd> mean;           // E{chi}
    std::vector<double> mean_abs;   // E{|chi|}
};

AfAverage monte_carlo_af(const SystemConfig& cfg, const std::vector<AfQuery>& queries, int cpis,
                         std::uint64_t seed, SelectionMode mode = SelectionMode::kUniform, int workers = 1);

enum class AfPlane { kRangeAngle, kVelocityAngle };

struct AfGridPoint {
    double a, b, magnitude;
};

// grid x grid offsets spanning [-1/2, 1/2) on both axes of the plane.
std::vector<AfGridPoint> af_plane(const SystemConfig& cfg, const SelectionSequence* sel, AfPlane plane, int grid,
                                  int workers = 1);

}  // namespace frac
