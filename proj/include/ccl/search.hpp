#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccl/trainer.hpp"

namespace ccl {

// Hyperparameter axes. The defaults are the full search space: 180 static
// combinations, times 9 FAMO (alpha, gamma) pairs = 1620.
struct Grid {
  std::vector<std::size_t> batch_sizes{1, 2, 4, 8, 16};
  std::vector<std::size_t> epochs{1, 3, 5, 10};
  std::vector<double> learning_rates{3e-5, 4e-5, 5e-5};
  std::vector<double> weight_decays{0.0, 0.01, 0.001};
  std::vector<double> famo_alphas{25e-2, 25e-3, 25e-4};
  std::vector<double> famo_gammas{1e-2, 1e-3, 1e-4};
};

nlohmann::json to_json(const Grid& g);
// Missing axes keep their defaults.
Grid grid_from_json(const nlohmann::json& j);

// Cartesian product, batch size outermost, then epochs, learning rate, weight
// decay and (FAMO only) alpha, gamma. Run i gets seed base.seed + i; other
// fields (lr_scale) are copied from `base`.
std::vector<TrainConfig> enumerate(const Grid& grid, Strategy strategy, const TrainConfig& base = {});

struct SearchEntry {
  std::size_t index = 0;  // position in enumeration order
  TrainConfig config;
  double average_f1 = 0.0;
  std::optional<EvalReport> report;
  std::optional<std::string> error;
};

struct SearchResult {
  std::vector<SearchEntry> ranked;  // descending average F1, ties by index, failed runs last

  const SearchEntry& best() const;
  std::size_t failures() const noexcept;
};

// Orders entries by the ranking rule above.
void rank_entries(std::vector<SearchEntry>& entries);

// Trains and evaluates every config on up to `parallelism` OpenMP threads.
// Output does not depend on parallelism or completion order.
SearchResult run_search(std::span<const Example> train_examples, const ClassStats& weight_stats,
                        std::span<const Example> eval_examples, Language language,
                        std::span<const TrainConfig> configs, int parallelism);

SearchResult run_search(std::span<const LabeledComment> train_rows, std::span<const LabeledComment> eval_rows,
                        const Grid& grid, Strategy strategy, const FeaturizerConfig& featurizer, int parallelism,
                        const TrainConfig& base = {});

// Joint ranking over several searches; ties resolved by the order of `parts`,
// then by index.
SearchResult merge_results(std::span<const SearchResult> parts);

nlohmann::json to_json(const SearchResult& result);
// rank,index,strategy,batch_size,epochs,learning_rate,weight_decay,famo_alpha,famo_gamma,average_f1,error
void write_search_csv(std::ostream& out, const SearchResult& result);

}  // namespace ccl
