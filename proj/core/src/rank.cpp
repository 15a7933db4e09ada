#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "sdk/errors.hpp"
#include "sdk/features.hpp"
#include "sdk/ml/gbr.hpp"
#include "sdk/ml/importance.hpp"
#include "sdk/ml/linear.hpp"
#include "sdk/ml/serialize.hpp"
#include "sdk/ml/tree.hpp"
#include "sdk/rng.hpp"

namespace sdk::features {

namespace {

/// Sum-normalize a raw score vector; all-zero input becomes uniform.
std::vector<double> sum_normalize(std::vector<double> scores) {
  double total = 0.0;
  for (const double s : scores) {
    total += s;
  }
  if (total <= 0.0) {
    std::fill(scores.begin(), scores.end(), 1.0 / static_cast<double>(scores.size()));
    return scores;
  }
  for (double& s : scores) {
    s /= total;
  }
  return scores;
}

std::vector<double> abs_coefficients(const ml::LinearModel& model) {
  std::vector<double> out(model.coefficients.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = std::abs(model.coefficients[j]);
  }
  return out;
}

}  // namespace

ImportanceReport rank_features(const FeatureTable& table, std::uint64_t seed,
                               const RankParams& params) {
  const std::size_t n = table.n_rows();
  const std::size_t p = table.n_features();
  if (p < 2) {
    throw TooFewFeatures("feature ranking needs at least 2 features");
  }
  if (n < 30) {
    throw TooFewRows("feature ranking needs at least 30 rows, got " + std::to_string(n));
  }

  // Standardize the target so the linear penalties are scale-free; R²-based
  // scores are invariant to this.
  const double y_mean = ml::mean_of(table.target);
  const double y_var = ml::variance_of(table.target);
  if (y_var <= 0.0) {
    throw DegenerateVariance("target has zero variance");
  }
  const double y_sd = std::sqrt(y_var);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = (table.target[i] - y_mean) / y_sd;
  }

  ImportanceReport report;
  report.feature_names = table.column_names;

  // 1. Random forest gain importance.
  const ml::ForestParams forest_params{};
  const auto forest = ml::fit_forest(table.x, y, forest_params, derive_seed(seed, "rank-forest"));
  report.per_method["random_forest"] = sum_normalize(ml::gain_importance(forest, p));

  // 2. GBR gain importance.
  const ml::GbrParams gbr_params{};
  const auto gbr = ml::fit_gbr(table.x, y, gbr_params, derive_seed(seed, "rank-gbr"));
  report.per_method["gbr"] = sum_normalize(ml::gain_importance(gbr));

  // 3. Lasso |coefficient|.
  const auto lasso = ml::fit_lasso(table.x, y, params.lasso_alpha);
  report.per_method["lasso"] = sum_normalize(abs_coefficients(lasso));

  // 4. Ridge |coefficient|.
  const auto ridge = ml::fit_ridge(table.x, y, params.ridge_alpha);
  report.per_method["ridge"] = sum_normalize(abs_coefficients(ridge));

  // 5. Permutation importance of a GBR scored on a holdout split.
  {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, "rank-holdout"));
    rng.shuffle(order);
    const std::size_t n_holdout =
        std::max<std::size_t>(2, static_cast<std::size_t>(std::round(params.permutation_holdout *
                                                                     static_cast<double>(n))));
    std::vector<std::size_t> holdout_idx(order.begin(), order.begin() + n_holdout);
    std::vector<std::size_t> train_idx(order.begin() + n_holdout, order.end());

    const ml::Matrix x_train = table.x.select_rows(train_idx);
    const std::vector<double> y_train = ml::select(y, train_idx);
    const ml::Matrix x_hold = table.x.select_rows(holdout_idx);
    const std::vector<double> y_hold = ml::select(y, holdout_idx);

    const auto perm_model = ml::fit_gbr(x_train, y_train, gbr_params, derive_seed(seed, "rank-perm-fit"));
    const ml::Predictor predictor = [&perm_model](const ml::Matrix& m) {
      return perm_model.predict(m);
    };
    std::vector<double> drops = ml::permutation_importance(
        predictor, x_hold, y_hold, params.permutation_repeats, derive_seed(seed, "rank-perm"));
    for (double& d : drops) {
      d = std::max(d, 0.0);  // negatives clipped here, not in the ml layer
    }
    report.per_method["permutation"] = sum_normalize(std::move(drops));
  }

  report.aggregate.assign(p, 0.0);
  for (const auto& [method, scores] : report.per_method) {
    for (std::size_t j = 0; j < p; ++j) {
      report.aggregate[j] += scores[j];
    }
  }
  const double n_methods = static_cast<double>(report.per_method.size());
  for (double& a : report.aggregate) {
    a /= n_methods;
  }
  return report;
}

std::vector<std::string> ImportanceReport::ranking() const {
  std::vector<std::size_t> order(feature_names.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (aggregate[a] != aggregate[b]) {
      return aggregate[a] > aggregate[b];
    }
    return feature_names[a] < feature_names[b];
  });
  std::vector<std::string> out;
  out.reserve(order.size());
  for (const std::size_t i : order) {
    out.push_back(feature_names[i]);
  }
  return out;
}

std::string ImportanceReport::to_json() const {
  nlohmann::json methods;
  for (const auto& [name, scores] : per_method) {
    methods[name] = scores;
  }
  nlohmann::json j{
      {"features", feature_names}, {"methods", methods}, {"aggregate", aggregate}};
  return j.dump(2) + "\n";
}

ImportanceReport ImportanceReport::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    throw ParseError("<importance report>", 1, 1, "invalid JSON");
  }
  ImportanceReport report;
  report.feature_names = j.at("features").get<std::vector<std::string>>();
  for (const auto& [name, scores] : j.at("methods").items()) {
    report.per_method[name] = scores.get<std::vector<double>>();
  }
  report.aggregate = j.at("aggregate").get<std::vector<double>>();
  return report;
}

}  // namespace sdk::features
