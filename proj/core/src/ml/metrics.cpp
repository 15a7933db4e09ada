#include "sdk/ml/metrics.hpp"

#include <cmath>
#include <numeric>

#include "sdk/errors.hpp"
#include "sdk/rng.hpp"

namespace sdk::ml {

double r2(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size() || y_true.size() < 2) {
    throw TooFewRows("r2 needs two equal-length vectors of size >= 2");
  }
  const double mean = mean_of(y_true);
  double sse = 0.0;
  double sst = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    sse += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
    sst += (y_true[i] - mean) * (y_true[i] - mean);
  }
  if (sst <= 0.0) {
    throw DegenerateVariance("r2 undefined: Var(y_true) = 0");
  }
  return 1.0 - sse / sst;
}

double rmse(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size() || y_true.empty()) {
    throw TooFewRows("rmse needs two equal-length non-empty vectors");
  }
  double sse = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    sse += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
  }
  return std::sqrt(sse / static_cast<double>(y_true.size()));
}

std::vector<std::size_t> kfold_sizes(std::size_t n, std::size_t k) {
  std::vector<std::size_t> sizes(k, n / k);
  for (std::size_t i = 0; i < n % k; ++i) {
    ++sizes[i];
  }
  return sizes;
}

CvResult kfold_cv(const Matrix& x, std::span<const double> y, std::size_t k, const FitFn& fit,
                  std::uint64_t seed) {
  const std::size_t n = x.rows();
  if (k < 2 || n < k) {
    throw TooFewRows("kfold_cv needs k >= 2 and n >= k");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, "kfold"));
  rng.shuffle(order);

  const std::vector<std::size_t> sizes = kfold_sizes(n, k);
  CvResult result;
  result.folds.reserve(k);

  std::size_t start = 0;
  for (std::size_t fold = 0; fold < k; ++fold) {
    const std::size_t stop = start + sizes[fold];
    std::vector<std::size_t> test_idx(order.begin() + start, order.begin() + stop);
    std::vector<std::size_t> train_idx;
    train_idx.reserve(n - test_idx.size());
    train_idx.insert(train_idx.end(), order.begin(), order.begin() + start);
    train_idx.insert(train_idx.end(), order.begin() + stop, order.end());
    start = stop;

    const Matrix x_train = x.select_rows(train_idx);
    const std::vector<double> y_train = select(y, train_idx);
    const Matrix x_test = x.select_rows(test_idx);
    const std::vector<double> y_test = select(y, test_idx);

    const Predictor predictor = fit(x_train, y_train);
    const std::vector<double> pred = predictor(x_test);
    result.folds.push_back({r2(y_test, pred), rmse(y_test, pred)});
  }

  double r2_sum = 0.0;
  double rmse_sum = 0.0;
  for (const auto& f : result.folds) {
    r2_sum += f.r2;
    rmse_sum += f.rmse;
  }
  result.r2_mean = r2_sum / static_cast<double>(k);
  result.rmse_mean = rmse_sum / static_cast<double>(k);
  double r2_ss = 0.0;
  double rmse_ss = 0.0;
  for (const auto& f : result.folds) {
    r2_ss += (f.r2 - result.r2_mean) * (f.r2 - result.r2_mean);
    rmse_ss += (f.rmse - result.rmse_mean) * (f.rmse - result.rmse_mean);
  }
  result.r2_std = std::sqrt(r2_ss / static_cast<double>(k));
  result.rmse_std = std::sqrt(rmse_ss / static_cast<double>(k));
  return result;
}

}  // namespace sdk::ml
