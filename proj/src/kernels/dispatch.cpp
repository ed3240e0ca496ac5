#include <atomic>
#include <cstdlib>
#include <cstring>

#include "kernels_impl.hpp"

namespace frac::simd {

namespace {

const KernelTable kScalarTable{Isa::kScalar,     "scalar",           scalar::dotc,
                               scalar::dotu,     scalar::axpy,       scalar::axpy_conj,
                               scalar::mul,      scalar::norm_sq,    scalar::soft_threshold};

#if defined(FRAC_HAVE_AVX2)
const KernelTable kAvx2Table{Isa::kAvx2,     "avx2",           avx2::dotc,
                             avx2::dotu,     avx2::axpy,       avx2::axpy_conj,
                             avx2::mul,      avx2::norm_sq,    avx2::soft_threshold};
#endif

std::atomic<const KernelTable*> g_active{nullptr};

const KernelTable* pick() {
    const char* env = std::getenv("FRAC_ISA");
    if (env && std::strcmp(env, "scalar") == 0) return &kScalarTable;
    if (isa_supported(Isa::kAvx2)) return &table(Isa::kAvx2);
    return &kScalarTable;
}

}  // namespace

bool isa_supported(Isa isa) {
    switch (isa) {
        case Isa::kScalar:
            return true;
        case Isa::kAvx2:
#if defined(FRAC_HAVE_AVX2)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
    }
    return false;
}

const KernelTable& table(Isa isa) {
#if defined(FRAC_HAVE_AVX2)
    if (isa == Isa::kAvx2) return kAvx2Table;
#endif
    (void)isa;
    return kScalarTable;
}

const KernelTable& active() {
    const KernelTable* t = g_active.load(std::memory_order_acquire);
    if (!t) {
        t = pick();
        g_active.store(t, std::memory_order_release);
    }
    return *t;
}

void force(Isa isa) {
    if (!isa_supported(isa)) isa = Isa::kScalar;
    g_active.store(&table(isa), std::memory_order_release);
}

void reset() { g_active.store(pick(), std::memory_order_release); }

void gemv(const cd* A, std::size_t rows, std::size_t cols, const cd* x, cd* y) {
    const KernelTable& k = active();
    for (std::size_t i = 0; i < rows; ++i) y[i] = k.dotu(A + i * cols, x, cols);
}

void gemv_h(const cd* A, std::size_t rows, std::size_t cols, const cd* x, cd* y) {
    const KernelTable& k = active();
    for (std::size_t j = 0; j < cols; ++j) y[j] = 0.0;
    for (std::size_t i = 0; i < rows; ++i)
        if (x[i] != 0.0) k.axpy_conj(x[i], A + i * cols, y, cols);
}

}  // namespace frac::simd
