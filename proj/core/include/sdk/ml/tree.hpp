#pragma once

#include <cstdint>
#include <vector>

#include "sdk/ml/matrix.hpp"
#include "sdk/rng.hpp"

namespace sdk::ml {

/// Binary regression tree stored as a flat node array; node 0 is the root.
/// Internal nodes route row x left when x[feature] <= threshold. Leaves have
/// feature == -1 and carry the mean of their training targets.
struct RegressionTree {
  struct Node {
    std::int32_t feature = -1;
    double threshold = 0.0;
    double gain = 0.0;  // SSE(parent) - SSE(left) - SSE(right), >= 0
    std::int32_t left = -1;
    std::int32_t right = -1;
    double leaf_value = 0.0;
  };
  std::vector<Node> nodes;

  bool is_leaf(std::size_t i) const { return nodes[i].feature < 0; }
  double predict_row(std::span<const double> x) const;
  std::vector<double> predict(const Matrix& x) const;
  std::size_t n_internal() const;
};

struct TreeParams {
  std::size_t max_depth = 3;  // 0 means a single leaf
  std::size_t min_leaf = 5;   // minimum samples per leaf
};

/// Greedy best-split regression tree. Split candidates are midpoints between
/// consecutive sorted unique feature values; the split maximizing the SSE
/// reduction wins, ties broken by (lower feature index, lower threshold).
/// Recursion stops at max_depth, min_leaf, or zero gain.
RegressionTree fit_tree(const Matrix& x, std::span<const double> y, const TreeParams& params);

struct ForestParams {
  std::size_t n_trees = 200;
  std::size_t max_depth = 10;
  std::size_t min_leaf = 5;
  double feature_frac = 1.0 / 3.0;  // fraction of features tried per split
  bool bootstrap = true;
};

/// Random forest: each tree sees a bootstrap sample (when enabled) and draws
/// ceil(feature_frac * p) candidate features per split from a deterministic
/// per-tree stream. Prediction is the mean over trees.
std::vector<RegressionTree> fit_forest(const Matrix& x, std::span<const double> y,
                                       const ForestParams& params, std::uint64_t seed);

std::vector<double> predict_forest(const std::vector<RegressionTree>& trees, const Matrix& x);

}  // namespace sdk::ml
