#include "sdk/ml/importance.hpp"

#include <numeric>

#include "sdk/errors.hpp"
#include "sdk/rng.hpp"

namespace sdk::ml {

std::vector<double> gain_importance(const std::vector<RegressionTree>& trees,
                                    std::size_t n_features) {
  std::vector<double> gains(n_features, 0.0);
  double total = 0.0;
  for (const auto& tree : trees) {
    for (const auto& node : tree.nodes) {
      if (node.feature >= 0) {
        gains[static_cast<std::size_t>(node.feature)] += node.gain;
        total += node.gain;
      }
    }
  }
  if (total <= 0.0) {
    // No splits anywhere: uniform importance.
    std::fill(gains.begin(), gains.end(), 1.0 / static_cast<double>(n_features));
    return gains;
  }
  for (double& g : gains) {
    g /= total;
  }
  return gains;
}

std::vector<double> gain_importance(const GbrModel& model) {
  return gain_importance(model.trees, model.n_features);
}

std::vector<double> permutation_importance(const Predictor& predictor, const Matrix& x,
                                           std::span<const double> y, std::size_t n_repeats,
                                           std::uint64_t seed) {
  if (n_repeats < 1) {
    throw ValidationError({"permutation importance needs n_repeats >= 1"});
  }
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  const double baseline = r2(y, predictor(x));

  std::vector<double> drops(p, 0.0);
  Rng rng(derive_seed(seed, "permutation"));
  Matrix shuffled = x;
  std::vector<std::size_t> order(n);
  for (std::size_t j = 0; j < p; ++j) {
    double total_drop = 0.0;
    for (std::size_t rep = 0; rep < n_repeats; ++rep) {
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(order);
      for (std::size_t i = 0; i < n; ++i) {
        shuffled(i, j) = x(order[i], j);
      }
      total_drop += baseline - r2(y, predictor(shuffled));
    }
    // Restore the column before moving on.
    for (std::size_t i = 0; i < n; ++i) {
      shuffled(i, j) = x(i, j);
    }
    drops[j] = total_drop / static_cast<double>(n_repeats);
  }
  return drops;
}

}  // namespace sdk::ml
