#include "sal/pooling.hpp"

#include <string>

#include "sal/error.hpp"
#include "sal/kernels.hpp"

namespace sal {

PoolingSpec PoolingSpec::for_width(std::size_t width, std::size_t t) {
  if (t == 0) throw ShapeError("pooling: output dimension must be positive");
  if (width < t)
    throw ShapeError("pooling: layer width " + std::to_string(width) + " is smaller than output dimension " +
                     std::to_string(t));
  return PoolingSpec{width - t, t};
}

std::vector<double> pool_apply(const PoolingSpec& p, std::span<const double> x) {
  if (x.size() != p.in_dim())
    throw ShapeError("pool_apply: expected length " + std::to_string(p.in_dim()) + ", got " + std::to_string(x.size()));
  std::vector<double> y(p.out_dim);
  const double w = p.weight();
  for (std::size_t i = 0; i < p.out_dim; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j <= p.mu; ++j) s += x[i + j];
    y[i] = w * s;
  }
  return y;
}

std::vector<double> pool_adjoint(const PoolingSpec& p, std::span<const double> y) {
  if (y.size() != p.out_dim)
    throw ShapeError("pool_adjoint: expected length " + std::to_string(p.out_dim) + ", got " +
                     std::to_string(y.size()));
  std::vector<double> x(p.in_dim(), 0.0);
  const double w = p.weight();
  for (std::size_t i = 0; i < p.out_dim; ++i)
    for (std::size_t j = 0; j <= p.mu; ++j) x[i + j] += w * y[i];
  return x;
}

Matrix pooling_matrix(const PoolingSpec& p) {
  Matrix m(p.out_dim, p.in_dim());
  for (std::size_t i = 0; i < p.out_dim; ++i)
    for (std::size_t j = 0; j <= p.mu; ++j) m(i, i + j) = p.weight();
  return m;
}

Matrix pool_rows(const PoolingSpec& p, const Matrix& a) {
  if (a.rows() != p.in_dim()) throw ShapeError("pool_rows: row count does not match pooling input dimension");
  Matrix out(p.out_dim, a.cols());
  const std::size_t c = a.cols();
  for (std::size_t i = 0; i < p.out_dim; ++i) {
    double* oi = out.data() + i * c;
    for (std::size_t j = 0; j <= p.mu; ++j) kernels::axpy(1.0, a.data() + (i + j) * c, oi, c);
    kernels::scale(p.weight(), oi, c);
  }
  return out;
}

Matrix pool_adjoint_rows(const PoolingSpec& p, const Matrix& b) {
  if (b.rows() != p.out_dim) throw ShapeError("pool_adjoint_rows: row count does not match pooling output dimension");
  Matrix out(p.in_dim(), b.cols());
  const std::size_t c = b.cols();
  const double w = p.weight();
  for (std::size_t i = 0; i < p.out_dim; ++i)
    for (std::size_t j = 0; j <= p.mu; ++j) kernels::axpy(w, b.data() + i * c, out.data() + (i + j) * c, c);
  return out;
}

Matrix pool_each_row(const PoolingSpec& p, const Matrix& z) {
  if (z.cols() != p.in_dim()) throw ShapeError("pool_each_row: column count does not match pooling input dimension");
  Matrix out(z.rows(), p.out_dim);
  const double w = p.weight();
  for (std::size_t r = 0; r < z.rows(); ++r) {
    const double* zr = z.data() + r * z.cols();
    double* o = out.data() + r * p.out_dim;
    for (std::size_t i = 0; i < p.out_dim; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j <= p.mu; ++j) s += zr[i + j];
      o[i] = w * s;
    }
  }
  return out;
}

}  // namespace sal
