#pragma once

#include <string>

#include "sdk/ml/gbr.hpp"
#include "sdk/ml/linear.hpp"
#include "sdk/ml/tree.hpp"

namespace sdk::ml {

/// JSON round-trips are exact: doubles are emitted in shortest round-trip
/// form, and every structural field is preserved.
std::string linear_to_json(const LinearModel& model);
LinearModel linear_from_json(const std::string& text);

std::string tree_to_json(const RegressionTree& tree);
RegressionTree tree_from_json(const std::string& text);

std::string gbr_to_json(const GbrModel& model);
GbrModel gbr_from_json(const std::string& text);

}  // namespace sdk::ml
