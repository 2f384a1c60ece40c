#pragma once

// Dense double-precision inner-loop kernels.
//
// Every kernel has a portable scalar reference implementation. On x86-64 an
// AVX2/FMA variant is compiled separately and selected at runtime when the
// CPU supports it. The environment variable SAL_LEARN_KERNEL=scalar|avx2|auto
// overrides the choice (an unsupported request falls back to scalar).
//
// Within one table the reduction order is fixed, so results are bit-stable
// for a given kernel choice. Scalar and SIMD variants agree to rounding.

#include <cstddef>
#include <string_view>

namespace sal::kernels {

struct KernelTable {
  const char* name;
  /// sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  /// y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  /// x[i] *= a
  void (*scale)(double a, double* x, std::size_t n);
  /// sum_i (x[i] - y[i])^2
  double (*sq_dist)(const double* x, const double* y, std::size_t n);
  /// out[i] = max(x[i], 0)
  void (*relu)(const double* x, double* out, std::size_t n);
};

const KernelTable& scalar_table();

/// nullptr when the AVX2 variant was not built or the CPU lacks AVX2+FMA.
const KernelTable* avx2_table();

/// Kernel table in use. Resolved once from SAL_LEARN_KERNEL and CPU features.
const KernelTable& active();

/// Forces a table by name ("scalar", "avx2", "auto"); returns false if the
/// requested variant is unavailable (the active table is then unchanged).
bool select(std::string_view name);

inline double dot(const double* x, const double* y, std::size_t n) { return active().dot(x, y, n); }
inline void axpy(double a, const double* x, double* y, std::size_t n) { active().axpy(a, x, y, n); }
inline void scale(double a, double* x, std::size_t n) { active().scale(a, x, n); }
inline double sq_dist(const double* x, const double* y, std::size_t n) { return active().sq_dist(x, y, n); }
inline void relu(const double* x, double* out, std::size_t n) { active().relu(x, out, n); }

}  // namespace sal::kernels
