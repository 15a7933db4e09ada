#pragma once

#include <cstdint>
#include <vector>

#include "sdk/ml/gbr.hpp"
#include "sdk/ml/metrics.hpp"
#include "sdk/ml/tree.hpp"

namespace sdk::ml {

/// Gain-based importance: per feature, the share of total split gain across
/// all trees. A model with no splits yields the uniform vector. Always sums
/// to 1.
std::vector<double> gain_importance(const std::vector<RegressionTree>& trees,
                                    std::size_t n_features);
std::vector<double> gain_importance(const GbrModel& model);

/// Permutation importance: mean drop in R² over n_repeats shuffles of each
/// feature column, from a seeded generator. Columns are processed in order,
/// repeats innermost. Negative drops are preserved.
std::vector<double> permutation_importance(const Predictor& predictor, const Matrix& x,
                                           std::span<const double> y, std::size_t n_repeats,
                                           std::uint64_t seed);

}  // namespace sdk::ml
