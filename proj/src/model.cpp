#include "ccl/model.hpp"

#include <algorithm>
#include <cmath>

#include "ccl/error.hpp"

namespace ccl {

namespace {

constexpr double kMinScale = 1e-100;

double clamp_probability(double p) noexcept {
  return std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
}

double bce(double p, std::uint8_t y) noexcept {
  const double q = clamp_probability(p);
  return y ? -std::log(q) : -std::log1p(-q);
}

void check_weights(std::size_t classes, const LossWeights& weights) {
  if (weights.size() != classes) {
    throw InputError("loss weights have " + std::to_string(weights.size()) + " entries, expected " +
                     std::to_string(classes));
  }
}

template <typename WeightFn>
LossAndGradient run_batch(const ModelParams& params, std::span<const Example* const> batch, WeightFn weight_of) {
  if (batch.empty()) throw InputError("gradient of an empty batch");
  const std::size_t C = params.classes();
  const double n = static_cast<double>(batch.size());

  LossAndGradient out;
  out.loss.per_class.assign(C, 0.0);
  Gradient& g = out.grad;
  g.classes = C;
  g.dims = params.dims();
  g.bias.assign(C, 0.0);

  for (const Example* ex : batch) {
    if (ex->x.dims != params.dims()) throw InputError("feature dimension mismatch");
    if (ex->y.size() != C) throw InputError("label width mismatch");
    for (const auto& e : ex->x.entries) g.indices.push_back(e.index);
  }
  std::sort(g.indices.begin(), g.indices.end());
  g.indices.erase(std::unique(g.indices.begin(), g.indices.end()), g.indices.end());
  g.rows.assign(g.indices.size() * C, 0.0);

  std::vector<double> dlogit(C);
  for (const Example* ex : batch) {
    const auto p = forward(params, ex->x);
    for (std::size_t c = 0; c < C; ++c) {
      out.loss.per_class[c] += bce(p[c], ex->y[c]);
      dlogit[c] = weight_of(c, p[c] - static_cast<double>(ex->y[c])) / n;
      g.bias[c] += dlogit[c];
    }
    auto pos = g.indices.begin();
    for (const auto& e : ex->x.entries) {
      pos = std::lower_bound(pos, g.indices.end(), e.index);
      double* row = g.rows.data() + static_cast<std::size_t>(pos - g.indices.begin()) * C;
      for (std::size_t c = 0; c < C; ++c) row[c] += dlogit[c] * e.value;
    }
  }
  for (std::size_t c = 0; c < C; ++c) {
    out.loss.per_class[c] /= n;
    out.loss.total += weight_of(c, out.loss.per_class[c]);
  }
  return out;
}

std::vector<const Example*> pointers(std::span<const Example> batch) {
  std::vector<const Example*> out;
  out.reserve(batch.size());
  for (const auto& e : batch) out.push_back(&e);
  return out;
}

}  // namespace

ModelParams::ModelParams(std::size_t classes, std::size_t dims)
    : classes_(classes), dims_(dims), values_(classes * dims, 0.0), bias_(classes, 0.0) {}

void ModelParams::scale_weights(double factor) {
  if (!(factor > 0.0)) throw NumericalError("weight scale factor must be positive");
  scale_ *= factor;
  if (scale_ < kMinScale) fold_scale();
}

void ModelParams::fold_scale() noexcept {
  if (scale_ == 1.0) return;
  for (double& v : values_) v *= scale_;
  scale_ = 1.0;
}

bool ModelParams::all_finite() const noexcept {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::isfinite(scale_) && std::all_of(values_.begin(), values_.end(), finite) &&
         std::all_of(bias_.begin(), bias_.end(), finite);
}

bool ModelParams::operator==(const ModelParams& other) const {
  if (classes_ != other.classes_ || dims_ != other.dims_ || bias_ != other.bias_) return false;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (scale_ * values_[i] != other.scale_ * other.values_[i]) return false;
  }
  return true;
}

double Gradient::dw(std::size_t c, std::size_t j) const {
  const auto it = std::lower_bound(indices.begin(), indices.end(), static_cast<std::uint32_t>(j));
  if (it == indices.end() || *it != j) return 0.0;
  return rows[static_cast<std::size_t>(it - indices.begin()) * classes + c];
}

std::vector<double> Gradient::dense_dw() const {
  std::vector<double> out(classes * dims, 0.0);
  for (std::size_t k = 0; k < indices.size(); ++k) {
    for (std::size_t c = 0; c < classes; ++c) out[c * dims + indices[k]] = rows[k * classes + c];
  }
  return out;
}

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::vector<double> logits(const ModelParams& params, const SparseVector& x) {
  if (x.dims != params.dims()) {
    throw InputError("feature vector has " + std::to_string(x.dims) + " dims, model expects " +
                     std::to_string(params.dims()));
  }
  const std::size_t C = params.classes();
  std::vector<double> acc(C, 0.0);
  for (const auto& e : x.entries) {
    const auto row = params.raw_row(e.index);
    for (std::size_t c = 0; c < C; ++c) acc[c] += row[c] * e.value;
  }
  for (std::size_t c = 0; c < C; ++c) acc[c] = params.scale() * acc[c] + params.bias(c);
  return acc;
}

std::vector<double> forward(const ModelParams& params, const SparseVector& x) {
  auto z = logits(params, x);
  for (double& v : z) v = sigmoid(v);
  return z;
}

LossBreakdown weighted_bce(std::span<const double> probs, std::span<const std::uint8_t> y, const LossWeights& weights) {
  if (probs.size() != y.size()) throw InputError("probability and label vectors differ in length");
  check_weights(probs.size(), weights);
  LossBreakdown out;
  out.per_class.reserve(probs.size());
  for (std::size_t c = 0; c < probs.size(); ++c) {
    out.per_class.push_back(bce(probs[c], y[c]));
    out.total += weights.w[c] * out.per_class.back();
  }
  return out;
}

LossBreakdown weighted_bce(std::span<const std::vector<double>> probs, std::span<const LabelVector> ys,
                           const LossWeights& weights) {
  if (probs.size() != ys.size()) throw InputError("batch probability and label counts differ");
  if (probs.empty()) throw InputError("loss of an empty batch");
  const std::size_t C = weights.size();
  LossBreakdown out;
  out.per_class.assign(C, 0.0);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i].size() != C || ys[i].size() != C) throw InputError("batch row width mismatch");
    for (std::size_t c = 0; c < C; ++c) out.per_class[c] += bce(probs[i][c], ys[i][c]);
  }
  for (std::size_t c = 0; c < C; ++c) {
    out.per_class[c] /= static_cast<double>(probs.size());
    out.total += weights.w[c] * out.per_class[c];
  }
  return out;
}

LossAndGradient loss_and_gradient(const ModelParams& params, std::span<const Example* const> batch,
                                  const LossWeights& weights) {
  check_weights(params.classes(), weights);
  return run_batch(params, batch, [&](std::size_t c, double v) { return weights.w[c] * v; });
}

LossAndGradient loss_and_gradient(const ModelParams& params, std::span<const Example* const> batch) {
  return run_batch(params, batch, [](std::size_t, double v) { return v; });
}

Gradient gradient(const ModelParams& params, std::span<const Example> batch, const LossWeights& weights) {
  const auto ptrs = pointers(batch);
  return loss_and_gradient(params, ptrs, weights).grad;
}

Gradient gradient(const ModelParams& params, std::span<const Example> batch) {
  const auto ptrs = pointers(batch);
  return loss_and_gradient(params, ptrs).grad;
}

void apply_update(ModelParams& params, const Gradient& grad, double learning_rate, double weight_decay) {
  if (grad.classes != params.classes() || grad.dims != params.dims()) throw InputError("gradient shape mismatch");
  const double factor = 1.0 - learning_rate * weight_decay;
  if (factor != 1.0) params.scale_weights(factor);
  const double step = learning_rate / params.scale();
  const std::size_t C = params.classes();
  for (std::size_t k = 0; k < grad.indices.size(); ++k) {
    auto row = params.raw_row(grad.indices[k]);
    const double* g = grad.rows.data() + k * C;
    for (std::size_t c = 0; c < C; ++c) row[c] -= step * g[c];
  }
  for (std::size_t c = 0; c < C; ++c) params.bias(c) -= learning_rate * grad.bias[c];
}

LabelVector predict(std::span<const double> probs, double threshold) {
  LabelVector out(probs.size());
  for (std::size_t c = 0; c < probs.size(); ++c) out[c] = probs[c] >= threshold ? 1 : 0;
  return out;
}

}  // namespace ccl
