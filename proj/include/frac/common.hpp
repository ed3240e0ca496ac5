#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace frac {

using cd = std::complex<double>;
using CVec = std::vector<cd>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kSpeedOfLight = 299792458.0;

// Bad input: inconsistent config, malformed file, out-of-range index.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// An iterative solver ran out of iterations.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// e^{j 2 pi t}; t is reduced to [-1/2, 1/2] first so large arguments keep full precision.
inline cd cis_turns(double t) {
    const double r = t - std::nearbyint(t);
    return {std::cos(kTwoPi * r), std::sin(kTwoPi * r)};
}

}  // namespace frac
