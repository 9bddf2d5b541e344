#include "ccl/trainer.hpp"

#include <cmath>
#include <numeric>

#include "ccl/error.hpp"
#include "ccl/hash.hpp"

namespace ccl {

namespace {

// splitmix64 stream.
std::uint64_t next_u64(std::uint64_t& state) {
  const std::uint64_t x = state;
  state += 0x9e3779b97f4a7c15ULL;
  return mix64(x);
}

std::uint64_t bounded(std::uint64_t& state, std::uint64_t bound) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t r;
  do {
    r = next_u64(state);
  } while (r >= limit);
  return r % bound;
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size == 0) throw InputError("batch size must be positive");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw InputError("learning rate must be >= 0");
  if (!(lr_scale > 0.0) || !std::isfinite(lr_scale)) throw InputError("lr scale must be positive");
  if (!std::isfinite(effective_lr())) throw InputError("learning rate times lr scale overflows");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) throw InputError("weight decay must be >= 0");
  if (effective_lr() * weight_decay >= 1.0) throw InputError("learning rate times weight decay must be below 1");
  if (strategy == Strategy::FAMO) {
    if (!famo_alpha || !famo_gamma) throw InputError("FAMO strategy needs famo_alpha and famo_gamma");
    if (!(*famo_alpha >= 0.0) || !(*famo_gamma >= 0.0)) throw InputError("famo_alpha and famo_gamma must be >= 0");
  }
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"batch_size", c.batch_size},     {"epochs", c.epochs},
                     {"learning_rate", c.learning_rate}, {"lr_scale", c.lr_scale},
                     {"weight_decay", c.weight_decay},   {"strategy", to_string(c.strategy)},
                     {"seed", c.seed}};
  if (c.famo_alpha) j["famo_alpha"] = *c.famo_alpha;
  if (c.famo_gamma) j["famo_gamma"] = *c.famo_gamma;
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  j.at("batch_size").get_to(c.batch_size);
  j.at("epochs").get_to(c.epochs);
  j.at("learning_rate").get_to(c.learning_rate);
  c.lr_scale = j.value("lr_scale", 1.0);
  j.at("weight_decay").get_to(c.weight_decay);
  c.strategy = parse_strategy(j.at("strategy").get<std::string>());
  c.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("famo_alpha")) c.famo_alpha = j.at("famo_alpha").get<double>();
  if (j.contains("famo_gamma")) c.famo_gamma = j.at("famo_gamma").get<double>();
}

nlohmann::json to_json(const TrainHistory& h) {
  nlohmann::json batches = nlohmann::json::array();
  for (const auto& b : h.batches) {
    batches.push_back({{"epoch", b.epoch}, {"batch", b.batch}, {"per_class_loss", b.per_class_loss},
                       {"weights", b.weights}});
  }
  return {{"epoch_loss", h.epoch_loss}, {"batches", std::move(batches)}};
}

void shuffle_indices(std::vector<std::size_t>& indices, std::uint64_t& state) {
  for (std::size_t i = indices.size(); i > 1; --i) {
    const std::size_t j = bounded(state, i);
    std::swap(indices[i - 1], indices[j]);
  }
}

TrainResult train_examples(std::span<const Example> examples, const ClassStats& weight_stats,
                           const TrainConfig& config) {
  config.validate();
  if (examples.empty()) throw InputError("training set is empty");
  const std::size_t C = examples.front().y.size();
  const std::size_t D = examples.front().x.dims;
  if (weight_stats.classes() != C) throw InputError("weight statistics do not match label width");

  TrainResult out{ModelParams(C, D), {}, static_weights(config.strategy, weight_stats)};
  LossWeights weights = out.initial_weights;
  std::optional<FamoState> famo;
  if (config.strategy == Strategy::FAMO) {
    famo = FamoState::uniform(C, *config.famo_alpha, *config.famo_gamma);
    weights = famo_weights(*famo);
  }

  std::uint64_t rng = mix64(config.seed);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<const Example*> batch;
  const double lr = config.effective_lr();

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_indices(order, rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t k = start; k < stop; ++k) batch.push_back(&examples[order[k]]);

      auto step = loss_and_gradient(out.params, batch, weights);
      if (!std::isfinite(step.loss.total)) {
        throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batches));
      }
      if (config.record_batches) out.history.batches.push_back({epoch, batches, step.loss.per_class, weights.w});
      loss_sum += step.loss.total;
      ++batches;

      apply_update(out.params, step.grad, lr, config.weight_decay);
      if (famo) {
        *famo = famo_update(*famo, step.loss.per_class);
        weights = famo_weights(*famo);
      }
    }
    out.history.epoch_loss.push_back(loss_sum / static_cast<double>(batches));
  }
  out.params.fold_scale();
  if (!out.params.all_finite()) throw NumericalError("training produced non-finite parameters");
  return out;
}

TrainResult train(std::span<const LabeledComment> train_rows, const TrainConfig& config,
                  const FeaturizerConfig& featurizer) {
  if (train_rows.empty()) throw InputError("training set is empty");
  const auto stats = compute_class_stats(train_rows);
  const auto examples = featurize_rows(train_rows, featurizer);
  return train_examples(examples, stats, config);
}

EvalReport evaluate_examples(const ModelParams& params, std::span<const Example> examples, Language language,
                             Exec exec) {
  if (examples.empty()) throw InputError("evaluation set is empty");
  const auto counts = tally_confusion(params, examples, 0.5, exec);
  return EvalReport{{make_language_report(language, counts)}};
}

EvalReport evaluate(const ModelParams& params, std::span<const LabeledComment> rows,
                    const FeaturizerConfig& featurizer) {
  if (rows.empty()) throw InputError("evaluation set is empty");
  const auto examples = featurize_rows(rows, featurizer);
  return evaluate_examples(params, examples, rows.front().language);
}

}  // namespace ccl
