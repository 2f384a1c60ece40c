#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sal/matrix.hpp"

namespace sal {

/// Sliding-window (stride 1) average pooling from R^{out_dim + mu} to R^{out_dim}:
///   y_i = (1/(mu+1)) * sum_{j=0..mu} x_{i+j}.
/// mu = 0 is the identity. The induced matrix always has full row rank.
struct PoolingSpec {
  std::size_t mu = 0;
  std::size_t out_dim = 1;

  std::size_t in_dim() const { return out_dim + mu; }
  double weight() const { return 1.0 / static_cast<double>(mu + 1); }

  /// Pooling for a layer of `width` neurons onto `t` outputs (mu = width - t).
  static PoolingSpec for_width(std::size_t width, std::size_t t);

  friend bool operator==(const PoolingSpec&, const PoolingSpec&) = default;
};

std::vector<double> pool_apply(const PoolingSpec& p, std::span<const double> x);
std::vector<double> pool_adjoint(const PoolingSpec& p, std::span<const double> y);

/// Dense out_dim x in_dim representation (tests and small direct solves).
Matrix pooling_matrix(const PoolingSpec& p);

/// P * A for A with in_dim rows: row i of the result is the mean of rows i..i+mu.
Matrix pool_rows(const PoolingSpec& p, const Matrix& a);
/// P^T * B for B with out_dim rows.
Matrix pool_adjoint_rows(const PoolingSpec& p, const Matrix& b);

/// P applied to every row of Z (rows are samples): Z P^T.
Matrix pool_each_row(const PoolingSpec& p, const Matrix& z);

}  // namespace sal
