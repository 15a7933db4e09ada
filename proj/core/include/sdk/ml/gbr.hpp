#pragma once

#include <cstdint>
#include <vector>

#include "sdk/ml/tree.hpp"

namespace sdk::ml {

struct GbrParams {
  std::size_t n_estimators = 300;
  double learning_rate = 0.05;
  std::size_t max_depth = 3;
  std::size_t min_leaf = 5;
};

/// Gradient-boosted regression trees under squared-error loss:
///   prediction(x) = init + learning_rate * sum_k tree_k(x)
/// where init is the training-target mean and each tree fits the residuals
/// of the model so far.
struct GbrModel {
  double init = 0.0;
  double learning_rate = 0.05;
  std::vector<RegressionTree> trees;
  std::size_t n_features = 0;

  double predict_row(std::span<const double> x) const;
  std::vector<double> predict(const Matrix& x) const;
};

/// Stage-wise residual fitting. The fit itself is deterministic; the seed is
/// part of the signature for interface uniformity and reproducibility
/// bookkeeping.
GbrModel fit_gbr(const Matrix& x, std::span<const double> y, const GbrParams& params,
                 std::uint64_t seed = 0);

}  // namespace sdk::ml
