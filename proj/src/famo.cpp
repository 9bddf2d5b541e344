#include "ccl/famo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ccl/error.hpp"

namespace ccl {

FamoState FamoState::uniform(std::size_t classes, double alpha, double gamma) {
  FamoState s;
  s.xi.assign(classes, 0.0);
  s.alpha = alpha;
  s.gamma = gamma;
  return s;
}

std::vector<double> softmax(std::span<const double> xi) {
  if (xi.empty()) return {};
  const double top = *std::max_element(xi.begin(), xi.end());
  std::vector<double> out(xi.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    out[i] = std::exp(xi[i] - top);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

LossWeights famo_weights(const FamoState& state) {
  LossWeights out{Strategy::FAMO, softmax(state.xi)};
  const double C = static_cast<double>(out.w.size());
  for (double& v : out.w) v *= C;
  return out;
}

FamoState famo_update(const FamoState& state, std::span<const double> new_loss) {
  const std::size_t C = state.xi.size();
  if (new_loss.size() != C) {
    throw InputError("famo update got " + std::to_string(new_loss.size()) + " losses for " + std::to_string(C) +
                     " classes");
  }
  std::vector<double> floored(C);
  for (std::size_t c = 0; c < C; ++c) {
    if (std::isnan(new_loss[c])) throw NumericalError("famo update: NaN loss for class " + std::to_string(c));
    if (new_loss[c] < 0.0) throw NumericalError("famo update: negative loss for class " + std::to_string(c));
    floored[c] = std::max(new_loss[c], kFamoLossFloor);
  }

  FamoState next = state;
  if (state.prev_loss) {
    const auto& prev = *state.prev_loss;
    std::vector<double> delta(C);
    for (std::size_t c = 0; c < C; ++c) delta[c] = std::log(prev[c]) - std::log(floored[c]);
    const double mean = std::accumulate(delta.begin(), delta.end(), 0.0) / static_cast<double>(C);
    for (std::size_t c = 0; c < C; ++c) {
      next.xi[c] = state.xi[c] - state.alpha * (delta[c] - mean) - state.alpha * state.gamma * state.xi[c];
    }
  }
  next.prev_loss = std::move(floored);
  return next;
}

}  // namespace ccl
