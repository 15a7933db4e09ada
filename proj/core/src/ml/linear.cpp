#include "sdk/ml/linear.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "sdk/errors.hpp"

namespace sdk::ml {

namespace {

/// Shared ridge/OLS core: solve (Z'Z + alpha*n*I) w = Z'y on standardized
/// features and centered target. With alpha == 0 this is plain OLS and the
/// system may be singular.
LinearModel solve_normal_equations(const Matrix& x, std::span<const double> y, double alpha,
                                   bool ridge_fallback) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  if (n != y.size()) {
    throw TooFewRows("row count mismatch between X and y");
  }
  if (alpha == 0.0 && n < p + 1) {
    throw TooFewRows("OLS needs at least features+1 rows");
  }

  LinearModel model;
  model.standardization = Standardization::fit(x);
  model.intercept = mean_of(y);
  model.coefficients.assign(p, 0.0);
  if (p == 0 || n == 0) {
    return model;
  }

  // Constant columns are excluded from the solve; their coefficient stays 0.
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < p; ++j) {
    double lo = x(0, j);
    double hi = x(0, j);
    for (std::size_t i = 1; i < n; ++i) {
      lo = std::min(lo, x(i, j));
      hi = std::max(hi, x(i, j));
    }
    if (hi > lo) {
      active.push_back(j);
    }
  }
  if (active.empty()) {
    return model;
  }

  const Matrix z = model.standardization.apply(x);
  Eigen::MatrixXd zm(n, active.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < active.size(); ++k) {
      zm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = z(i, active[k]);
    }
  }
  Eigen::VectorXd yc(n);
  for (std::size_t i = 0; i < n; ++i) {
    yc(static_cast<Eigen::Index>(i)) = y[i] - model.intercept;
  }

  Eigen::MatrixXd gram = zm.transpose() * zm;
  const Eigen::VectorXd rhs = zm.transpose() * yc;

  double effective_alpha = alpha;
  if (alpha == 0.0) {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(gram);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (smax <= 0.0 || smin / smax < 1e-10) {
      if (!ridge_fallback) {
        throw SingularSystem("X'X is numerically singular (condition > 1e10)");
      }
      effective_alpha = 1e-8;
    }
  }
  gram.diagonal().array() += effective_alpha * static_cast<double>(n);

  const Eigen::VectorXd w = gram.ldlt().solve(rhs);
  for (std::size_t k = 0; k < active.size(); ++k) {
    model.coefficients[active[k]] = w(static_cast<Eigen::Index>(k));
  }
  return model;
}

}  // namespace

double LinearModel::predict_row(std::span<const double> x) const {
  double out = intercept;
  for (std::size_t j = 0; j < coefficients.size(); ++j) {
    out += coefficients[j] * (x[j] - standardization.mean[j]) / standardization.std[j];
  }
  return out;
}

std::vector<double> LinearModel::predict(const Matrix& x) const {
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    out[i] = predict_row(x.row(i));
  }
  return out;
}

LinearModel fit_ols(const Matrix& x, std::span<const double> y, bool ridge_fallback) {
  return solve_normal_equations(x, y, 0.0, ridge_fallback);
}

LinearModel fit_ridge(const Matrix& x, std::span<const double> y, double alpha) {
  if (alpha < 0.0) {
    throw ValidationError({"ridge alpha must be >= 0"});
  }
  return solve_normal_equations(x, y, alpha, false);
}

double soft_threshold(double z, double gamma) {
  if (z > gamma) {
    return z - gamma;
  }
  if (z < -gamma) {
    return z + gamma;
  }
  return 0.0;
}

LinearModel fit_lasso(const Matrix& x, std::span<const double> y, double alpha,
                      std::size_t max_iter, double tol) {
  if (alpha <= 0.0) {
    throw ValidationError({"lasso alpha must be > 0"});
  }
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();

  LinearModel model;
  model.standardization = Standardization::fit(x);
  model.intercept = mean_of(y);
  model.coefficients.assign(p, 0.0);
  if (n == 0 || p == 0) {
    return model;
  }

  const Matrix z = model.standardization.apply(x);
  std::vector<double> col_sq(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      col_sq[j] += z(i, j) * z(i, j);
    }
  }

  std::vector<double> residual(n);
  for (std::size_t i = 0; i < n; ++i) {
    residual[i] = y[i] - model.intercept;
  }

  const double gamma = alpha * static_cast<double>(n);
  model.converged = false;
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    double max_delta = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      if (col_sq[j] <= 0.0) {
        continue;  // constant column, coefficient stays 0
      }
      const double w_old = model.coefficients[j];
      // rho_j = z_j . residual including feature j's own contribution
      double rho = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        rho += z(i, j) * residual[i];
      }
      rho += w_old * col_sq[j];
      const double w_new = soft_threshold(rho, gamma) / col_sq[j];
      const double delta = w_new - w_old;
      if (delta != 0.0) {
        for (std::size_t i = 0; i < n; ++i) {
          residual[i] -= delta * z(i, j);
        }
        model.coefficients[j] = w_new;
      }
      max_delta = std::max(max_delta, std::abs(delta));
    }
    if (max_delta < tol) {
      model.converged = true;
      break;
    }
  }
  return model;
}

}  // namespace sdk::ml
