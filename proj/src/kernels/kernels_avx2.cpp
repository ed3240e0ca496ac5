// Built with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include "kernels_impl.hpp"

namespace frac::simd::avx2 {

namespace {

inline __m256d load(const cd* p) { return _mm256_loadu_pd(reinterpret_cast<const double*>(p)); }
inline void store(cd* p, __m256d v) { _mm256_storeu_pd(reinterpret_cast<double*>(p), v); }
inline __m256d swap_ri(__m256d v) { return _mm256_permute_pd(v, 0x5); }

inline void lanes(__m256d v, double out[4]) { _mm256_storeu_pd(out, v); }

}  // namespace

cd dotc(const cd* a, const cd* b, std::size_t n) {
    __m256d p0 = _mm256_setzero_pd(), p1 = _mm256_setzero_pd();
    __m256d x0 = _mm256_setzero_pd(), x1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d a0 = load(a + i), b0 = load(b + i);
        const __m256d a1 = load(a + i + 2), b1 = load(b + i + 2);
        p0 = _mm256_fmadd_pd(a0, b0, p0);
        x0 = _mm256_fmadd_pd(a0, swap_ri(b0), x0);
        p1 = _mm256_fmadd_pd(a1, b1, p1);
        x1 = _mm256_fmadd_pd(a1, swap_ri(b1), x1);
    }
    for (; i + 2 <= n; i += 2) {
        const __m256d a0 = load(a + i), b0 = load(b + i);
        p0 = _mm256_fmadd_pd(a0, b0, p0);
        x0 = _mm256_fmadd_pd(a0, swap_ri(b0), x0);
    }
    double p[4], x[4];
    lanes(_mm256_add_pd(p0, p1), p);
    lanes(_mm256_add_pd(x0, x1), x);
    double re = (p[0] + p[1]) + (p[2] + p[3]);
    double im = (x[0] - x[1]) + (x[2] - x[3]);
    for (; i < n; ++i) {
        re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
        im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
    }
    return {re, im};
}

cd dotu(const cd* a, const cd* b, std::size_t n) {
    __m256d p0 = _mm256_setzero_pd(), p1 = _mm256_setzero_pd();
    __m256d x0 = _mm256_setzero_pd(), x1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d a0 = load(a + i), b0 = load(b + i);
        const __m256d a1 = load(a + i + 2), b1 = load(b + i + 2);
        p0 = _mm256_fmadd_pd(a0, b0, p0);
        x0 = _mm256_fmadd_pd(a0, swap_ri(b0), x0);
        p1 = _mm256_fmadd_pd(a1, b1, p1);
        x1 = _mm256_fmadd_pd(a1, swap_ri(b1), x1);
    }
    for (; i + 2 <= n; i += 2) {
        const __m256d a0 = load(a + i), b0 = load(b + i);
        p0 = _mm256_fmadd_pd(a0, b0, p0);
        x0 = _mm256_fmadd_pd(a0, swap_ri(b0), x0);
    }
    double p[4], x[4];
    lanes(_mm256_add_pd(p0, p1), p);
    lanes(_mm256_add_pd(x0, x1), x);
    double re = (p[0] - p[1]) + (p[2] - p[3]);
    double im = (x[0] + x[1]) + (x[2] + x[3]);
    for (; i < n; ++i) {
        re += a[i].real() * b[i].real() - a[i].imag() * b[i].imag();
        im += a[i].real() * b[i].imag() + a[i].imag() * b[i].real();
    }
    return {re, im};
}

void axpy(cd alpha, const cd* x, cd* y, std::size_t n) {
    const double c = alpha.real(), d = alpha.imag();
    const __m256d vc = _mm256_set1_pd(c);
    const __m256d vd = _mm256_setr_pd(-d, d, -d, d);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = load(x + i);
        __m256d yv = load(y + i);
        yv = _mm256_fmadd_pd(xv, vc, yv);
        yv = _mm256_fmadd_pd(swap_ri(xv), vd, yv);
        store(y + i, yv);
    }
    for (; i < n; ++i) {
        const double xr = x[i].real(), xi = x[i].imag();
        y[i] = {y[i].real() + c * xr - d * xi, y[i].imag() + c * xi + d * xr};
    }
}

void axpy_conj(cd alpha, const cd* x, cd* y, std::size_t n) {
    const double c = alpha.real(), d = alpha.imag();
    const __m256d vc = _mm256_setr_pd(c, -c, c, -c);
    const __m256d vd = _mm256_set1_pd(d);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = load(x + i);
        __m256d yv = load(y + i);
        yv = _mm256_fmadd_pd(xv, vc, yv);
        yv = _mm256_fmadd_pd(swap_ri(xv), vd, yv);
        store(y + i, yv);
    }
    for (; i < n; ++i) {
        const double xr = x[i].real(), xi = x[i].imag();
        y[i] = {y[i].real() + c * xr + d * xi, y[i].imag() - c * xi + d * xr};
    }
}

void mul(const cd* a, const cd* b, cd* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d av = load(a + i), bv = load(b + i);
        const __m256d are = _mm256_movedup_pd(av);
        const __m256d aim = _mm256_permute_pd(av, 0xF);
        const __m256d t = _mm256_mul_pd(aim, swap_ri(bv));
        store(out + i, _mm256_fmaddsub_pd(are, bv, t));
    }
    for (; i < n; ++i) {
        const double ar = a[i].real(), ai = a[i].imag(), br = b[i].real(), bi = b[i].imag();
        out[i] = {ar * br - ai * bi, ar * bi + ai * br};
    }
}

double norm_sq(const cd* x, std::size_t n) {
    __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x0 = load(x + i), x1 = load(x + i + 2);
        s0 = _mm256_fmadd_pd(x0, x0, s0);
        s1 = _mm256_fmadd_pd(x1, x1, s1);
    }
    for (; i + 2 <= n; i += 2) {
        const __m256d x0 = load(x + i);
        s0 = _mm256_fmadd_pd(x0, x0, s0);
    }
    double s[4];
    lanes(_mm256_add_pd(s0, s1), s);
    double r = (s[0] + s[1]) + (s[2] + s[3]);
    for (; i < n; ++i) r += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
    return r;
}

void soft_threshold(const cd* x, double t, cd* out, std::size_t n) {
    const __m256d vt = _mm256_set1_pd(t);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = load(x + i);
        const __m256d sq = _mm256_mul_pd(xv, xv);
        const __m256d mag = _mm256_sqrt_pd(_mm256_hadd_pd(sq, sq));
        const __m256d keep = _mm256_cmp_pd(mag, vt, _CMP_GT_OQ);
        const __m256d s = _mm256_and_pd(keep, _mm256_div_pd(_mm256_sub_pd(mag, vt), mag));
        store(out + i, _mm256_mul_pd(xv, s));
    }
    for (; i < n; ++i) {
        const double mag = std::sqrt(x[i].real() * x[i].real() + x[i].imag() * x[i].imag());
        const double s = mag > t ? (mag - t) / mag : 0.0;
        out[i] = x[i] * s;
    }
}

}  // namespace frac::simd::avx2
