#include "kernels_impl.hpp"

namespace frac::simd::scalar {

cd dotc(const cd* a, const cd* b, std::size_t n) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
        im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
    }
    return {re, im};
}

cd dotu(const cd* a, const cd* b, std::size_t n) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        re += a[i].real() * b[i].real() - a[i].imag() * b[i].imag();
        im += a[i].real() * b[i].imag() + a[i].imag() * b[i].real();
    }
    return {re, im};
}

void axpy(cd alpha, const cd* x, cd* y, std::size_t n) {
    const double c = alpha.real(), d = alpha.imag();
    for (std::size_t i = 0; i < n; ++i) {
        const double xr = x[i].real(), xi = x[i].imag();
        y[i] = {y[i].real() + c * xr - d * xi, y[i].imag() + c * xi + d * xr};
    }
}

void axpy_conj(cd alpha, const cd* x, cd* y, std::size_t n) {
    const double c = alpha.real(), d = alpha.imag();
    for (std::size_t i = 0; i < n; ++i) {
        const double xr = x[i].real(), xi = x[i].imag();
        y[i] = {y[i].real() + c * xr + d * xi, y[i].imag() - c * xi + d * xr};
    }
}

void mul(const cd* a, const cd* b, cd* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag(), br = b[i].real(), bi = b[i].imag();
        out[i] = {ar * br - ai * bi, ar * bi + ai * br};
    }
}

double norm_sq(const cd* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
    return s;
}

void soft_threshold(const cd* x, double t, cd* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double mag = std::sqrt(x[i].real() * x[i].real() + x[i].imag() * x[i].imag());
        const double s = mag > t ? (mag - t) / mag : 0.0;
        out[i] = x[i] * s;
    }
}

}  // namespace frac::simd::scalar
