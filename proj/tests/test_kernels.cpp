#include <doctest.h>

#include <cmath>

#include "frac/kernels.hpp"
#include "frac/rng.hpp"

using namespace frac;
using namespace frac::simd;

namespace {

CVec random_vec(std::size_t n, std::uint64_t idx) {
    auto rng = stream_rng(42, 0x6b, idx);
    CVec v(n);
    for (auto& x : v) x = complex_normal(rng, 1.0);
    return v;
}

double max_abs_diff(const CVec& a, const CVec& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// plain loops, independent of both tables
cd ref_dotc(const CVec& a, const CVec& b) {
    cd s{};
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

const std::size_t kLengths[] = {0, 1, 2, 3, 5, 8, 17, 64, 255, 1000};

}  // namespace

TEST_CASE("scalar table matches reference loops") {
    const KernelTable& s = table(Isa::kScalar);
    for (std::size_t n : kLengths) {
        const CVec a = random_vec(n, 1), b = random_vec(n, 2);
        CHECK(std::abs(s.dotc(a.data(), b.data(), n) - ref_dotc(a, b)) <= 1e-12 * (1 + n));
        cd u{};
        for (std::size_t i = 0; i < n; ++i) u += a[i] * b[i];
        CHECK(std::abs(s.dotu(a.data(), b.data(), n) - u) <= 1e-12 * (1 + n));
        double nn = 0;
        for (auto x : a) nn += std::norm(x);
        CHECK(s.norm_sq(a.data(), n) == doctest::Approx(nn));
    }
}

TEST_CASE("avx2 kernels agree with scalar") {
    if (!isa_supported(Isa::kAvx2)) {
        MESSAGE("AVX2 not available on this host");
        return;
    }
    const KernelTable& s = table(Isa::kScalar);
    const KernelTable& v = table(Isa::kAvx2);
    CHECK(v.isa == Isa::kAvx2);
    for (std::size_t n : kLengths) {
        CAPTURE(n);
        const CVec a = random_vec(n, 3), b = random_vec(n, 4);
        const double tol = 1e-13 * (1 + n);
        CHECK(std::abs(s.dotc(a.data(), b.data(), n) - v.dotc(a.data(), b.data(), n)) <= tol);
        CHECK(std::abs(s.dotu(a.data(), b.data(), n) - v.dotu(a.data(), b.data(), n)) <= tol);
        CHECK(std::abs(s.norm_sq(a.data(), n) - v.norm_sq(a.data(), n)) <= tol);

        const cd alpha{0.3, -1.7};
        CVec y1 = b, y2 = b;
        s.axpy(alpha, a.data(), y1.data(), n);
        v.axpy(alpha, a.data(), y2.data(), n);
        CHECK(max_abs_diff(y1, y2) <= 1e-14);
        y1 = b;
        y2 = b;
        s.axpy_conj(alpha, a.data(), y1.data(), n);
        v.axpy_conj(alpha, a.data(), y2.data(), n);
        CHECK(max_abs_diff(y1, y2) <= 1e-14);

        CVec m1(n), m2(n);
        s.mul(a.data(), b.data(), m1.data(), n);
        v.mul(a.data(), b.data(), m2.data(), n);
        CHECK(max_abs_diff(m1, m2) <= 1e-14);

        CVec t1(n), t2(n);
        s.soft_threshold(a.data(), 0.8, t1.data(), n);
        v.soft_threshold(a.data(), 0.8, t2.data(), n);
        CHECK(max_abs_diff(t1, t2) <= 1e-14);
    }
}

TEST_CASE("soft threshold semantics") {
    for (Isa isa : {Isa::kScalar, Isa::kAvx2}) {
        if (!isa_supported(isa)) continue;
        const KernelTable& k = table(isa);
        const CVec x{{3, 4}, {0.1, 0}, {0, 0}, {-1, 0}, {0, 2}};
        CVec out(x.size());
        k.soft_threshold(x.data(), 1.0, out.data(), x.size());
        CHECK(std::abs(out[0] - cd(3 * 0.8, 4 * 0.8)) < 1e-15);
        CHECK(out[1] == cd(0, 0));
        CHECK(out[2] == cd(0, 0));
        CHECK(out[3] == cd(0, 0));
        CHECK(std::abs(out[4] - cd(0, 1)) < 1e-15);
    }
}

TEST_CASE("gemv and gemv_h") {
    const std::size_t r = 13, c = 29;
    const CVec A = random_vec(r * c, 7), x = random_vec(c, 8), z = random_vec(r, 9);
    CVec y_ref(r), w_ref(c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            y_ref[i] += A[i * c + j] * x[j];
            w_ref[j] += std::conj(A[i * c + j]) * z[i];
        }
    for (Isa isa : {Isa::kScalar, Isa::kAvx2}) {
        if (!isa_supported(isa)) continue;
        force(isa);
        CHECK(active().isa == isa);
        CVec y(r), w(c);
        gemv(A.data(), r, c, x.data(), y.data());
        gemv_h(A.data(), r, c, z.data(), w.data());
        CHECK(max_abs_diff(y, y_ref) < 1e-12);
        CHECK(max_abs_diff(w, w_ref) < 1e-12);
    }
    reset();
}

TEST_CASE("dispatch picks a supported table") {
    reset();
    CHECK(isa_supported(active().isa));
    CHECK(isa_supported(Isa::kScalar));
}
