#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ccl/weighting.hpp"

namespace ccl {

// Adaptive loss weighting driven by per-class log-loss improvement.
//
// Weights are C * softmax(xi). After each batch the improvement
// delta_c = ln(prev_c) - ln(new_c) is centred across classes and
//   xi_c <- xi_c - alpha * (delta_c - mean(delta)) - alpha * gamma * xi_c,
// so classes whose loss falls faster than average lose weight and slower
// ones gain it. The first update only records the losses.
struct FamoState {
  std::vector<double> xi;
  double alpha = 0.025;
  double gamma = 1e-3;
  std::optional<std::vector<double>> prev_loss;

  static FamoState uniform(std::size_t classes, double alpha, double gamma);
};

inline constexpr double kFamoLossFloor = 1e-12;

// softmax(xi), computed with the max-shift.
std::vector<double> softmax(std::span<const double> xi);

// w_c = C * softmax(xi)_c, so the uniform state reproduces equal weights.
LossWeights famo_weights(const FamoState& state);

// Losses below the floor are raised to it; NaN or negative losses throw
// NumericalError; a length mismatch throws InputError.
FamoState famo_update(const FamoState& state, std::span<const double> new_loss);

}  // namespace ccl
