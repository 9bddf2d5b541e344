#include "ccl/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "ccl/error.hpp"

namespace ccl {

namespace {

void tally_one(std::vector<ClassCounts>& counts, const LabelVector& predicted, const LabelVector& truth) {
  for (std::size_t c = 0; c < counts.size(); ++c) {
    auto& k = counts[c];
    if (predicted[c] && truth[c]) ++k.tp;
    else if (predicted[c]) ++k.fp;
    else if (truth[c]) ++k.fn;
    else ++k.tn;
  }
}

double row_bce(double p, std::uint8_t y) {
  const double q = std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
  return y ? -std::log(q) : -std::log1p(-q);
}

}  // namespace

std::vector<Example> featurize_rows(std::span<const LabeledComment> rows, const FeaturizerConfig& config, Exec exec) {
  config.validate();
  std::vector<Example> out(rows.size());
  const auto n = static_cast<std::ptrdiff_t>(rows.size());
  if (exec == Exec::Serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = {featurize(rows[i].combo, config), rows[i].labels};
    return out;
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = {featurize(rows[i].combo, config), rows[i].labels};
  return out;
}

std::vector<ClassCounts> tally_confusion(const ModelParams& params, std::span<const Example> examples,
                                         double threshold, Exec exec) {
  const std::size_t C = params.classes();
  for (const auto& e : examples) {
    if (e.y.size() != C) throw InputError("label width does not match model classes");
    if (e.x.dims != params.dims()) throw InputError("feature dimension mismatch");
  }
  std::vector<ClassCounts> total(C);
  const auto n = static_cast<std::ptrdiff_t>(examples.size());
  if (exec == Exec::Serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      tally_one(total, predict(forward(params, examples[i].x), threshold), examples[i].y);
    }
    return total;
  }
#pragma omp parallel
  {
    std::vector<ClassCounts> local(C);
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      tally_one(local, predict(forward(params, examples[i].x), threshold), examples[i].y);
    }
#pragma omp critical
    for (std::size_t c = 0; c < C; ++c) {
      total[c].tp += local[c].tp;
      total[c].fp += local[c].fp;
      total[c].fn += local[c].fn;
      total[c].tn += local[c].tn;
    }
  }
  return total;
}

LossBreakdown dataset_loss(const ModelParams& params, std::span<const Example> examples, const LossWeights& weights,
                           Exec exec) {
  if (examples.empty()) throw InputError("loss of an empty dataset");
  const std::size_t C = params.classes();
  if (weights.size() != C) throw InputError("loss weights do not match model classes");
  // Per-row losses are stored and summed in row order so both paths agree bit for bit.
  std::vector<double> per_row(examples.size() * C);
  const auto n = static_cast<std::ptrdiff_t>(examples.size());
  auto fill = [&](std::ptrdiff_t i) {
    const auto p = forward(params, examples[i].x);
    for (std::size_t c = 0; c < C; ++c) per_row[i * C + c] = row_bce(p[c], examples[i].y[c]);
  };
  if (exec == Exec::Serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) fill(i);
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) fill(i);
  }
  LossBreakdown out;
  out.per_class.assign(C, 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < C; ++c) out.per_class[c] += per_row[i * C + c];
  }
  for (std::size_t c = 0; c < C; ++c) {
    out.per_class[c] /= static_cast<double>(n);
    out.total += weights.w[c] * out.per_class[c];
  }
  return out;
}

}  // namespace ccl
