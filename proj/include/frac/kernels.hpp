#pragma once

#include <cstddef>

#include "frac/common.hpp"

namespace frac::simd {

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
    Isa isa;
    const char* name;
    cd (*dotc)(const cd* a, const cd* b, std::size_t n);               // sum conj(a) * b
    cd (*dotu)(const cd* a, const cd* b, std::size_t n);               // sum a * b
    void (*axpy)(cd alpha, const cd* x, cd* y, std::size_t n);         // y += alpha * x
    void (*axpy_conj)(cd alpha, const cd* x, cd* y, std::size_t n);    // y += alpha * conj(x)
    void (*mul)(const cd* a, const cd* b, cd* out, std::size_t n);     // out = a .* b
    double (*norm_sq)(const cd* x, std::size_t n);
    // out = x * max(0, |x| - t) / |x|
    void (*soft_threshold)(const cd* x, double t, cd* out, std::size_t n);
};

bool isa_supported(Isa isa);
const KernelTable& table(Isa isa);

// Best supported ISA, unless FRAC_ISA=scalar is set or force() was called.
const KernelTable& active();
void force(Isa isa);
void reset();

// Row-major matrix helpers built on the active table.
// y = A x, A is rows x cols.
void gemv(const cd* A, std::size_t rows, std::size_t cols, const cd* x, cd* y);
// y = A^H x.
void gemv_h(const cd* A, std::size_t rows, std::size_t cols, const cd* x, cd* y);

}  // namespace frac::simd
