#pragma once

#include "sal/kernels.hpp"

namespace sal::kernels::detail {

double dot_scalar(const double* x, const double* y, std::size_t n);
void axpy_scalar(double a, const double* x, double* y, std::size_t n);
void scale_scalar(double a, double* x, std::size_t n);
double sq_dist_scalar(const double* x, const double* y, std::size_t n);
void relu_scalar(const double* x, double* out, std::size_t n);

#if defined(SAL_HAVE_AVX2)
const KernelTable& avx2_table_unchecked();
#endif

}  // namespace sal::kernels::detail
