#pragma once

#include <vector>

#include "sdk/ml/matrix.hpp"

namespace sdk::ml {

/// Linear model with the fit-time standardization baked in. Coefficients are
/// in standardized feature space:
///   prediction(x) = intercept + sum_j coef[j] * (x_j - mean_j) / std_j
/// Constant columns get std 1 and coefficient 0.
struct LinearModel {
  std::vector<double> coefficients;
  double intercept = 0.0;
  Standardization standardization;
  bool converged = true;  // false only when lasso hit max_iter

  double predict_row(std::span<const double> x) const;
  std::vector<double> predict(const Matrix& x) const;
};

/// Ordinary least squares via normal equations on standardized features.
/// Identical to fit_ridge with alpha 0. Throws SingularSystem when X'X is
/// numerically singular, unless ridge_fallback is set, in which case a tiny
/// ridge penalty (1e-8) regularizes the solve instead.
LinearModel fit_ols(const Matrix& x, std::span<const double> y, bool ridge_fallback = false);

/// Ridge regression: standardize features, center the target, solve
/// (Z'Z + alpha*n*I) w = Z'y. The intercept is the target mean and carries
/// no penalty.
LinearModel fit_ridge(const Matrix& x, std::span<const double> y, double alpha);

/// Lasso via cyclic coordinate descent on standardized features:
///   w_j <- S(rho_j, alpha*n) / sum_i z_ij^2,  S(z, g) = sign(z)*max(|z|-g, 0).
/// Stops when the largest coefficient change drops below tol; sets
/// converged = false when max_iter is exhausted first.
LinearModel fit_lasso(const Matrix& x, std::span<const double> y, double alpha,
                      std::size_t max_iter = 1000, double tol = 1e-8);

/// Soft-threshold operator used by the lasso update.
double soft_threshold(double z, double gamma);

}  // namespace sdk::ml
