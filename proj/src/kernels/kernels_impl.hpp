#pragma once

#include <cstddef>

#include "frac/kernels.hpp"

namespace frac::simd {

namespace scalar {
cd dotc(const cd* a, const cd* b, std::size_t n);
cd dotu(const cd* a, const cd* b, std::size_t n);
void axpy(cd alpha, const cd* x, cd* y, std::size_t n);
void axpy_conj(cd alpha, const cd* x, cd* y, std::size_t n);
void mul(const cd* a, const cd* b, cd* out, std::size_t n);
double norm_sq(const cd* x, std::size_t n);
void soft_threshold(const cd* x, double t, cd* out, std::size_t n);
}  // namespace scalar

#if defined(FRAC_HAVE_AVX2)
namespace avx2 {
cd dotc(const cd* a, const cd* b, std::size_t n);
cd dotu(const cd* a, const cd* b, std::size_t n);
void axpy(cd alpha, const cd* x, cd* y, std::size_t n);
void axpy_conj(cd alpha, const cd* x, cd* y, std::size_t n);
void mul(const cd* a, const cd* b, cd* out, std::size_t n);
double norm_sq(const cd* x, std::size_t n);
void soft_threshold(const cd* x, double t, cd* out, std::size_t n);
}  // namespace avx2
#endif

}  // namespace frac::simd
