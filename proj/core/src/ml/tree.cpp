#include "sdk/ml/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sdk/errors.hpp"

namespace sdk::ml {

namespace {

// Gains at or below this are treated as zero so float noise on constant
// targets cannot manufacture splits.
constexpr double kMinGain = 1e-12;

struct BestSplit {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
};

double node_sse(double sum, double sum_sq, std::size_t n) {
  return sum_sq - sum * sum / static_cast<double>(n);
}

/// Recursive builder. Nodes are expanded depth-first, left child before
/// right, which fixes the random feature-subset consumption order.
class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const double> y, const TreeParams& params,
              double feature_frac, Rng* rng)
      : x_(x), y_(y), params_(params), feature_frac_(feature_frac), rng_(rng) {}

  RegressionTree build(std::vector<std::size_t> rows) {
    RegressionTree tree;
    grow(tree, std::move(rows), 0);
    return tree;
  }

 private:
  std::int32_t grow(RegressionTree& tree, std::vector<std::size_t> rows, std::size_t depth) {
    const std::int32_t index = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();

    double sum = 0.0;
    double sum_sq = 0.0;
    for (const std::size_t r : rows) {
      sum += y_[r];
      sum_sq += y_[r] * y_[r];
    }
    const double leaf_value = rows.empty() ? 0.0 : sum / static_cast<double>(rows.size());
    tree.nodes[index].leaf_value = leaf_value;

    if (depth >= params_.max_depth || rows.size() < 2 * params_.min_leaf) {
      return index;
    }
    const BestSplit split = find_best_split(rows, node_sse(sum, sum_sq, rows.size()));
    if (!split.found) {
      return index;
    }

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    left_rows.reserve(rows.size());
    right_rows.reserve(rows.size());
    for (const std::size_t r : rows) {
      (x_(r, split.feature) <= split.threshold ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    tree.nodes[index].feature = static_cast<std::int32_t>(split.feature);
    tree.nodes[index].threshold = split.threshold;
    tree.nodes[index].gain = split.gain;
    tree.nodes[index].left = grow(tree, std::move(left_rows), depth + 1);
    tree.nodes[index].right = grow(tree, std::move(right_rows), depth + 1);
    return index;
  }

  std::vector<std::size_t> candidate_features() {
    const std::size_t p = x_.cols();
    if (rng_ == nullptr || feature_frac_ >= 1.0) {
      std::vector<std::size_t> all(p);
      std::iota(all.begin(), all.end(), 0);
      return all;
    }
    const std::size_t m =
        std::min(p, std::max<std::size_t>(1, static_cast<std::size_t>(
                                                 std::ceil(feature_frac_ * static_cast<double>(p)))));
    // Partial Fisher-Yates: first m entries become the sample.
    std::vector<std::size_t> pool(p);
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng_->uniform_int(p - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(m);
    std::sort(pool.begin(), pool.end());  // keep the lower-index tie rule meaningful
    return pool;
  }

  BestSplit find_best_split(const std::vector<std::size_t>& rows, double sse_parent) {
    BestSplit best;
    const std::size_t n = rows.size();
    const std::vector<std::size_t> features = candidate_features();

    std::vector<std::pair<double, double>> sorted(n);  // (feature value, target)
    for (const std::size_t feature : features) {
      for (std::size_t i = 0; i < n; ++i) {
        sorted[i] = {x_(rows[i], feature), y_[rows[i]]};
      }
      std::sort(sorted.begin(), sorted.end());

      double left_sum = 0.0;
      double left_sq = 0.0;
      double total_sum = 0.0;
      double total_sq = 0.0;
      for (const auto& [v, t] : sorted) {
        total_sum += t;
        total_sq += t * t;
      }
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_sum += sorted[i].second;
        left_sq += sorted[i].second * sorted[i].second;
        if (sorted[i].first == sorted[i + 1].first) {
          continue;  // not a boundary between distinct values
        }
        const std::size_t n_left = i + 1;
        const std::size_t n_right = n - n_left;
        if (n_left < params_.min_leaf || n_right < params_.min_leaf) {
          continue;
        }
        const double gain = sse_parent - node_sse(left_sum, left_sq, n_left) -
                            node_sse(total_sum - left_sum, total_sq - left_sq, n_right);
        // Strict improvement required: ties keep the earlier candidate,
        // i.e. lower feature index, then lower threshold.
        if (gain > kMinGain && (!best.found || gain > best.gain)) {
          best.found = true;
          best.feature = feature;
          best.threshold = 0.5 * (sorted[i].first + sorted[i + 1].first);
          best.gain = gain;
        }
      }
    }
    return best;
  }

  const Matrix& x_;
  std::span<const double> y_;
  TreeParams params_;
  double feature_frac_;
  Rng* rng_;
};

}  // namespace

double RegressionTree::predict_row(std::span<const double> x) const {
  std::size_t i = 0;
  while (!is_leaf(i)) {
    const Node& node = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold
                                     ? node.left
                                     : node.right);
  }
  return nodes[i].leaf_value;
}

std::vector<double> RegressionTree::predict(const Matrix& x) const {
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    out[i] = predict_row(x.row(i));
  }
  return out;
}

std::size_t RegressionTree::n_internal() const {
  std::size_t count = 0;
  for (const auto& node : nodes) {
    if (node.feature >= 0) {
      ++count;
    }
  }
  return count;
}

RegressionTree fit_tree(const Matrix& x, std::span<const double> y, const TreeParams& params) {
  if (x.rows() != y.size()) {
    throw TooFewRows("row count mismatch between X and y");
  }
  std::vector<std::size_t> rows(x.rows());
  std::iota(rows.begin(), rows.end(), 0);
  TreeBuilder builder(x, y, params, 1.0, nullptr);
  return builder.build(std::move(rows));
}

std::vector<RegressionTree> fit_forest(const Matrix& x, std::span<const double> y,
                                       const ForestParams& params, std::uint64_t seed) {
  if (params.n_trees < 1) {
    throw ValidationError({"forest needs n_trees >= 1"});
  }
  const std::size_t n = x.rows();
  std::vector<RegressionTree> trees;
  trees.reserve(params.n_trees);
  const TreeParams tree_params{params.max_depth, params.min_leaf};
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    Rng rng(derive_seed(seed, "forest-tree-" + std::to_string(t)));
    std::vector<std::size_t> rows(n);
    if (params.bootstrap) {
      for (std::size_t i = 0; i < n; ++i) {
        rows[i] = static_cast<std::size_t>(rng.uniform_int(n));
      }
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    TreeBuilder builder(x, y, tree_params, params.feature_frac, &rng);
    trees.push_back(builder.build(std::move(rows)));
  }
  return trees;
}

std::vector<double> predict_forest(const std::vector<RegressionTree>& trees, const Matrix& x) {
  std::vector<double> out(x.rows(), 0.0);
  for (const auto& tree : trees) {
    for (std::size_t i = 0; i < x.rows(); ++i) {
      out[i] += tree.predict_row(x.row(i));
    }
  }
  const double inv = trees.empty() ? 0.0 : 1.0 / static_cast<double>(trees.size());
  for (double& v : out) {
    v *= inv;
  }
  return out;
}

}  // namespace sdk::ml
