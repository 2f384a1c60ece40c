#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace sal {

/// Dense row-major matrix of doubles. Rows are contiguous so that per-sample
/// loops hand whole rows to the SIMD kernels.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix from_rows(std::size_t rows, std::size_t cols, std::vector<double> data);
  /// n x 1 column from a vector.
  static Matrix column(std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<const double> values() const { return data_; }
  std::span<double> values() { return data_; }

  Matrix transposed() const;
  void fill(double v);

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);

/// C = A * B^T. Inner loop is a dot product over A's columns.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// C = A * B.
Matrix matmul(const Matrix& a, const Matrix& b);
/// C = A^T * B, accumulated sample-by-sample over the shared row index.
Matrix matmul_tn(const Matrix& a, const Matrix& b);

double frobenius_sq(const Matrix& a);
double frobenius(const Matrix& a);
double max_abs(const Matrix& a);

/// Copy of `a` with a trailing column of ones.
Matrix append_ones_column(const Matrix& a);

}  // namespace sal
