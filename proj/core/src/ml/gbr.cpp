#include "sdk/ml/gbr.hpp"

#include "sdk/errors.hpp"

namespace sdk::ml {

double GbrModel::predict_row(std::span<const double> x) const {
  double out = init;
  for (const auto& tree : trees) {
    out += learning_rate * tree.predict_row(x);
  }
  return out;
}

std::vector<double> GbrModel::predict(const Matrix& x) const {
  std::vector<double> out(x.rows(), init);
  for (const auto& tree : trees) {
    for (std::size_t i = 0; i < x.rows(); ++i) {
      out[i] += learning_rate * tree.predict_row(x.row(i));
    }
  }
  return out;
}

GbrModel fit_gbr(const Matrix& x, std::span<const double> y, const GbrParams& params,
                 std::uint64_t /*seed*/) {
  if (params.n_estimators < 1) {
    throw ValidationError({"gbr needs n_estimators >= 1"});
  }
  if (params.learning_rate <= 0.0 || params.learning_rate > 1.0) {
    throw ValidationError({"gbr learning_rate must be in (0, 1]"});
  }
  const std::size_t n = x.rows();
  if (n != y.size()) {
    throw TooFewRows("row count mismatch between X and y");
  }

  GbrModel model;
  model.learning_rate = params.learning_rate;
  model.n_features = x.cols();
  model.init = mean_of(y);
  model.trees.reserve(params.n_estimators);

  std::vector<double> residual(n);
  for (std::size_t i = 0; i < n; ++i) {
    residual[i] = y[i] - model.init;
  }

  const TreeParams tree_params{params.max_depth, params.min_leaf};
  for (std::size_t k = 0; k < params.n_estimators; ++k) {
    RegressionTree tree = fit_tree(x, residual, tree_params);
    for (std::size_t i = 0; i < n; ++i) {
      residual[i] -= params.learning_rate * tree.predict_row(x.row(i));
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace sdk::ml
