#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "ccl/corpus.hpp"
#include "ccl/famo.hpp"
#include "ccl/featurizer.hpp"
#include "ccl/kernels.hpp"
#include "ccl/metrics.hpp"
#include "ccl/model.hpp"
#include "ccl/weighting.hpp"

namespace ccl {

struct TrainConfig {
  std::size_t batch_size = 8;
  std::size_t epochs = 10;
  double learning_rate = 5e-5;
  double lr_scale = 1.0;  // effective step = learning_rate * lr_scale
  double weight_decay = 0.0;
  Strategy strategy = Strategy::EW;
  std::optional<double> famo_alpha;
  std::optional<double> famo_gamma;
  std::uint64_t seed = 0;
  bool record_batches = false;

  double effective_lr() const noexcept { return learning_rate * lr_scale; }
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

struct BatchRecord {
  std::size_t epoch = 0;
  std::size_t batch = 0;
  std::vector<double> per_class_loss;
  std::vector<double> weights;
  bool operator==(const BatchRecord&) const = default;
};

struct TrainHistory {
  std::vector<double> epoch_loss;  // mean weighted loss over the batches of each epoch
  std::vector<BatchRecord> batches;
  bool operator==(const TrainHistory&) const = default;
};

nlohmann::json to_json(const TrainHistory& h);

struct TrainResult {
  ModelParams params;
  TrainHistory history;
  LossWeights initial_weights;
};

// Mini-batch SGD from zero parameters. Rows are shuffled each epoch with a
// per-run generator seeded from config.seed; the last partial batch is kept.
// Static strategies take their weights from `weight_stats`; FAMO starts
// uniform and is updated after every batch from that batch's per-class losses.
TrainResult train_examples(std::span<const Example> examples, const ClassStats& weight_stats,
                           const TrainConfig& config);

// Featurizes `train_rows` and derives weight statistics from them.
TrainResult train(std::span<const LabeledComment> train_rows, const TrainConfig& config,
                  const FeaturizerConfig& featurizer);

EvalReport evaluate_examples(const ModelParams& params, std::span<const Example> examples, Language language,
                             Exec exec = Exec::Parallel);
EvalReport evaluate(const ModelParams& params, std::span<const LabeledComment> rows,
                    const FeaturizerConfig& featurizer);

// Deterministic Fisher-Yates with rejection sampling, independent of the
// standard library's distribution implementations.
void shuffle_indices(std::vector<std::size_t>& indices, std::uint64_t& state);

}  // namespace ccl
