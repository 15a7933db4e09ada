#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sdk::ml {

/// Dense row-major matrix of doubles; rows are samples, columns features.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_columns(const std::vector<std::vector<double>>& columns);

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

  std::vector<double> column(std::size_t j) const;

  /// Rows selected by index, in the given order.
  Matrix select_rows(std::span<const std::size_t> indices) const;

  /// Columns selected by index, in the given order.
  Matrix select_columns(std::span<const std::size_t> indices) const;

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Per-column mean and population standard deviation. Constant columns get
/// std 1 so standardization is always well-defined.
struct Standardization {
  std::vector<double> mean;
  std::vector<double> std;

  static Standardization fit(const Matrix& x);
  Matrix apply(const Matrix& x) const;
};

std::vector<double> select(std::span<const double> v, std::span<const std::size_t> indices);

double mean_of(std::span<const double> v);
double variance_of(std::span<const double> v);  // population variance

}  // namespace sdk::ml
