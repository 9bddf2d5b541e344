#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ccl/corpus.hpp"
#include "ccl/featurizer.hpp"
#include "ccl/weighting.hpp"

namespace ccl {

inline constexpr double kProbabilityFloor = 1e-12;

// Linear multi-label head: logit_c = W_c . x + b_c.
//
// W is stored feature-major (row j holds the C class weights of feature j) so a
// sparse input touches contiguous memory, and carries a lazy multiplier:
// effective W = scale * values. Weight decay then costs O(1) per step.
class ModelParams {
 public:
  ModelParams() = default;
  ModelParams(std::size_t classes, std::size_t dims);

  std::size_t classes() const noexcept { return classes_; }
  std::size_t dims() const noexcept { return dims_; }

  double weight(std::size_t c, std::size_t j) const noexcept { return scale_ * values_[j * classes_ + c]; }
  void set_weight(std::size_t c, std::size_t j, double v) noexcept { values_[j * classes_ + c] = v / scale_; }
  double bias(std::size_t c) const noexcept { return bias_[c]; }
  double& bias(std::size_t c) noexcept { return bias_[c]; }
  std::span<const double> biases() const noexcept { return bias_; }

  // Stored values of feature j, one per class; effective weights are scale() times these.
  std::span<const double> raw_row(std::size_t j) const noexcept { return {values_.data() + j * classes_, classes_}; }
  std::span<double> raw_row(std::size_t j) noexcept { return {values_.data() + j * classes_, classes_}; }
  double scale() const noexcept { return scale_; }

  // W <- factor * W. factor must be > 0.
  void scale_weights(double factor);
  // Multiplies the pending scale into the stored values (scale becomes 1).
  void fold_scale() noexcept;

  bool all_finite() const noexcept;

  // Compares effective parameters after folding; used for bit-identity checks.
  bool operator==(const ModelParams& other) const;

 private:
  std::size_t classes_ = 0;
  std::size_t dims_ = 0;
  double scale_ = 1.0;
  std::vector<double> values_;
  std::vector<double> bias_;
};

struct Example {
  SparseVector x;
  LabelVector y;
};

struct LossBreakdown {
  std::vector<double> per_class;  // mean BCE per class over the batch
  double total = 0.0;             // sum_c w_c * per_class[c]
};

// Sparse gradient of the batch-mean weighted BCE. Only features present in
// the batch have rows; `rows` holds C values per entry of `indices`.
struct Gradient {
  std::size_t classes = 0;
  std::size_t dims = 0;
  std::vector<std::uint32_t> indices;  // ascending
  std::vector<double> rows;
  std::vector<double> bias;

  // dW[c, j]; zero for features outside the batch.
  double dw(std::size_t c, std::size_t j) const;
  // Dense C x D matrix, class-major.
  std::vector<double> dense_dw() const;
};

double sigmoid(double z) noexcept;

std::vector<double> logits(const ModelParams& params, const SparseVector& x);

// p_c = sigmoid(W_c . x + b_c). Throws InputError when x.dims != params.dims().
std::vector<double> forward(const ModelParams& params, const SparseVector& x);

// Probabilities are clamped into [eps, 1 - eps] before taking logs.
LossBreakdown weighted_bce(std::span<const double> probs, std::span<const std::uint8_t> y, const LossWeights& weights);

// Batch version: per_class is averaged over rows before weighting.
LossBreakdown weighted_bce(std::span<const std::vector<double>> probs, std::span<const LabelVector> ys,
                           const LossWeights& weights);

struct LossAndGradient {
  LossBreakdown loss;
  Gradient grad;
};

// One pass over the batch producing both the loss (at the current parameters)
// and its gradient. dlogit_c = w_c (p_c - y_c) / |batch|.
LossAndGradient loss_and_gradient(const ModelParams& params, std::span<const Example* const> batch,
                                  const LossWeights& weights);
// Same with all weights equal to one and no multiplication by a weight.
LossAndGradient loss_and_gradient(const ModelParams& params, std::span<const Example* const> batch);

Gradient gradient(const ModelParams& params, std::span<const Example> batch, const LossWeights& weights);
Gradient gradient(const ModelParams& params, std::span<const Example> batch);

// theta <- theta - lr * grad - lr * wd * theta, decay on W only.
void apply_update(ModelParams& params, const Gradient& grad, double learning_rate, double weight_decay);

// Bit c set iff p_c >= threshold.
LabelVector predict(std::span<const double> probs, double threshold = 0.5);

}  // namespace ccl
