#include "sdk/ml/matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace sdk::ml {

Matrix Matrix::from_columns(const std::vector<std::vector<double>>& columns) {
  if (columns.empty()) {
    return {};
  }
  const std::size_t rows = columns.front().size();
  for (const auto& col : columns) {
    if (col.size() != rows) {
      throw std::invalid_argument("column length mismatch");
    }
  }
  Matrix m(rows, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    for (std::size_t i = 0; i < rows; ++i) {
      m(i, j) = columns[j][i];
    }
  }
  return m;
}

std::vector<double> Matrix::column(std::size_t j) const {
  std::vector<double> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    out[i] = (*this)(i, j);
  }
  return out;
}

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto src = row(indices[k]);
    std::copy(src.begin(), src.end(), out.row(k).begin());
  }
  return out;
}

Matrix Matrix::select_columns(std::span<const std::size_t> indices) const {
  Matrix out(rows_, indices.size());
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = 0; k < indices.size(); ++k) {
      out(i, k) = (*this)(i, indices[k]);
    }
  }
  return out;
}

Standardization Standardization::fit(const Matrix& x) {
  Standardization s;
  const std::size_t p = x.cols();
  const std::size_t n = x.rows();
  s.mean.assign(p, 0.0);
  s.std.assign(p, 1.0);
  if (n == 0) {
    return s;
  }
  for (std::size_t j = 0; j < p; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum += x(i, j);
    }
    s.mean[j] = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = x(i, j) - s.mean[j];
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    s.std[j] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

Matrix Standardization::apply(const Matrix& x) const {
  Matrix z(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      z(i, j) = (x(i, j) - mean[j]) / std[j];
    }
  }
  return z;
}

std::vector<double> select(std::span<const double> v, std::span<const std::size_t> indices) {
  std::vector<double> out;
  out.reserve(indices.size());
  for (const std::size_t i : indices) {
    out.push_back(v[i]);
  }
  return out;
}

double mean_of(std::span<const double> v) {
  if (v.empty()) {
    return 0.0;
  }
  double sum = 0.0;
  for (const double x : v) {
    sum += x;
  }
  return sum / static_cast<double>(v.size());
}

double variance_of(std::span<const double> v) {
  if (v.empty()) {
    return 0.0;
  }
  const double m = mean_of(v);
  double ss = 0.0;
  for (const double x : v) {
    ss += (x - m) * (x - m);
  }
  return ss / static_cast<double>(v.size());
}

}  // namespace sdk::ml
