#pragma once

#include <span>
#include <string>
#include <vector>

#include "ccl/corpus.hpp"
#include "ccl/featurizer.hpp"
#include "ccl/model.hpp"

namespace ccl {

// Serial is the reference path; Parallel splits rows across OpenMP threads
// and must produce identical results.
enum class Exec { Serial, Parallel };

struct ClassCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }
  bool operator==(const ClassCounts&) const = default;
};

std::vector<Example> featurize_rows(std::span<const LabeledComment> rows, const FeaturizerConfig& config,
                                    Exec exec = Exec::Parallel);

// Predicts every example at `threshold` and tallies per-class confusion counts.
std::vector<ClassCounts> tally_confusion(const ModelParams& params, std::span<const Example> examples,
                                         double threshold = 0.5, Exec exec = Exec::Parallel);

// Mean weighted BCE over all examples (per class, then weighted sum).
LossBreakdown dataset_loss(const ModelParams& params, std::span<const Example> examples, const LossWeights& weights,
                           Exec exec = Exec::Parallel);

}  // namespace ccl
