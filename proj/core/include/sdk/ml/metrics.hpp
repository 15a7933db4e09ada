#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sdk/ml/matrix.hpp"

namespace sdk::ml {

/// Coefficient of determination, 1 - SSE/SST. Throws DegenerateVariance when
/// the true values have no variance.
double r2(std::span<const double> y_true, std::span<const double> y_pred);

/// Root mean squared error.
double rmse(std::span<const double> y_true, std::span<const double> y_pred);

struct FoldMetrics {
  double r2 = 0.0;
  double rmse = 0.0;
};

struct CvResult {
  std::vector<FoldMetrics> folds;
  double r2_mean = 0.0;
  double r2_std = 0.0;  // population std over folds
  double rmse_mean = 0.0;
  double rmse_std = 0.0;
};

/// A fitted predictor: maps a matrix of rows to predictions.
using Predictor = std::function<std::vector<double>(const Matrix&)>;

/// Fits on a training subset and returns the resulting predictor.
using FitFn = std::function<Predictor(const Matrix&, std::span<const double>)>;

/// k-fold cross-validation: seeded shuffle, then contiguous folds of size
/// n/k with the remainder spread over the first folds. Each fold is held out
/// once against a model fitted on the rest.
CvResult kfold_cv(const Matrix& x, std::span<const double> y, std::size_t k, const FitFn& fit,
                  std::uint64_t seed);

/// Fold sizes for n samples into k folds (remainder rule), exposed for tests.
std::vector<std::size_t> kfold_sizes(std::size_t n, std::size_t k);

}  // namespace sdk::ml
