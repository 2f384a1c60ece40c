#include "kernels_impl.hpp"

namespace sal::kernels::detail {

// Four interleaved partial sums, combined as (s0 + s1) + (s2 + s3). The AVX2
// variant uses a different lane layout, so the two agree only to rounding.
double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += x[i] * y[i];
    s1 += x[i + 1] * y[i + 1];
    s2 += x[i + 2] * y[i + 2];
    s3 += x[i + 3] * y[i + 3];
  }
  for (; i < n; ++i) s0 += x[i] * y[i];
  return (s0 + s1) + (s2 + s3);
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_scalar(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

double sq_dist_scalar(const double* x, const double* y, std::size_t n) {
  double s0 = 0.0, s1 = 0.0;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const double d0 = x[i] - y[i];
    const double d1 = x[i + 1] - y[i + 1];
    s0 += d0 * d0;
    s1 += d1 * d1;
  }
  for (; i < n; ++i) {
    const double d = x[i] - y[i];
    s0 += d * d;
  }
  return s0 + s1;
}

void relu_scalar(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

}  // namespace sal::kernels::detail

namespace sal::kernels {

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar", detail::dot_scalar, detail::axpy_scalar, detail::scale_scalar,
                                 detail::sq_dist_scalar, detail::relu_scalar};
  return table;
}

}  // namespace sal::kernels
