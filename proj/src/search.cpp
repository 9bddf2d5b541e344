#include "ccl/search.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "ccl/csv.hpp"
#include "ccl/error.hpp"

namespace ccl {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

nlohmann::json to_json(const Grid& g) {
  return {{"batch_sizes", g.batch_sizes},       {"epochs", g.epochs},
          {"learning_rates", g.learning_rates}, {"weight_decays", g.weight_decays},
          {"famo_alphas", g.famo_alphas},       {"famo_gammas", g.famo_gammas}};
}

Grid grid_from_json(const nlohmann::json& j) {
  Grid g;
  try {
    if (j.contains("batch_sizes")) j.at("batch_sizes").get_to(g.batch_sizes);
    if (j.contains("epochs")) j.at("epochs").get_to(g.epochs);
    if (j.contains("learning_rates")) j.at("learning_rates").get_to(g.learning_rates);
    if (j.contains("weight_decays")) j.at("weight_decays").get_to(g.weight_decays);
    if (j.contains("famo_alphas")) j.at("famo_alphas").get_to(g.famo_alphas);
    if (j.contains("famo_gammas")) j.at("famo_gammas").get_to(g.famo_gammas);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("grid: ") + e.what());
  }
  return g;
}

std::vector<TrainConfig> enumerate(const Grid& grid, Strategy strategy, const TrainConfig& base) {
  std::vector<TrainConfig> out;
  const bool famo = strategy == Strategy::FAMO;
  const std::vector<double> none{0.0};
  const auto& alphas = famo ? grid.famo_alphas : none;
  const auto& gammas = famo ? grid.famo_gammas : none;
  for (auto bs : grid.batch_sizes)
    for (auto ep : grid.epochs)
      for (auto lr : grid.learning_rates)
        for (auto wd : grid.weight_decays)
          for (auto a : alphas)
            for (auto g : gammas) {
              TrainConfig c = base;
              c.batch_size = bs;
              c.epochs = ep;
              c.learning_rate = lr;
              c.weight_decay = wd;
              c.strategy = strategy;
              c.famo_alpha.reset();
              c.famo_gamma.reset();
              if (famo) {
                c.famo_alpha = a;
                c.famo_gamma = g;
              }
              c.seed = base.seed + out.size();
              out.push_back(c);
            }
  return out;
}

const SearchEntry& SearchResult::best() const {
  if (ranked.empty()) throw InputError("search produced no entries");
  return ranked.front();
}

std::size_t SearchResult::failures() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(ranked.begin(), ranked.end(), [](const SearchEntry& e) { return e.error.has_value(); }));
}

void rank_entries(std::vector<SearchEntry>& entries) {
  std::stable_sort(entries.begin(), entries.end(), [](const SearchEntry& a, const SearchEntry& b) {
    if (a.error.has_value() != b.error.has_value()) return !a.error.has_value();
    if (!a.error && a.average_f1 != b.average_f1) return a.average_f1 > b.average_f1;
    return a.index < b.index;
  });
}

SearchResult run_search(std::span<const Example> train_set, const ClassStats& weight_stats,
                        std::span<const Example> eval_set, Language language,
                        std::span<const TrainConfig> configs, int parallelism) {
  if (train_set.empty()) throw InputError("search needs a non-empty training split");
  if (eval_set.empty()) throw InputError("search needs a non-empty evaluation split");
  if (parallelism < 1) throw InputError("parallelism must be at least 1");

  std::vector<SearchEntry> entries(configs.size());
  const auto n = static_cast<std::ptrdiff_t>(configs.size());
  const Exec inner = parallelism > 1 ? Exec::Serial : Exec::Parallel;

#pragma omp parallel for num_threads(parallelism) schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    SearchEntry& e = entries[i];
    e.index = static_cast<std::size_t>(i);
    e.config = configs[i];
    try {
      const auto trained = train_examples(train_set, weight_stats, e.config);
      auto report = evaluate_examples(trained.params, eval_set, language, inner);
      e.average_f1 = averages(report).grand.f1;
      e.report = std::move(report);
    } catch (const std::exception& ex) {
      e.error = ex.what();
    }
  }
  SearchResult result{std::move(entries)};
  rank_entries(result.ranked);
  return result;
}

SearchResult run_search(std::span<const LabeledComment> train_rows, std::span<const LabeledComment> eval_rows,
                        const Grid& grid, Strategy strategy, const FeaturizerConfig& featurizer, int parallelism,
                        const TrainConfig& base) {
  if (train_rows.empty()) throw InputError("search needs a non-empty training split");
  if (eval_rows.empty()) throw InputError("search needs a non-empty evaluation split");
  const auto stats = compute_class_stats(train_rows);
  const auto train_set = featurize_rows(train_rows, featurizer);
  const auto eval_set = featurize_rows(eval_rows, featurizer);
  const auto configs = enumerate(grid, strategy, base);
  return run_search(train_set, stats, eval_set, eval_rows.front().language, configs, parallelism);
}

SearchResult merge_results(std::span<const SearchResult> parts) {
  struct Keyed {
    std::size_t part;
    SearchEntry entry;
  };
  std::vector<Keyed> all;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    for (const auto& e : parts[p].ranked) all.push_back({p, e});
  }
  std::stable_sort(all.begin(), all.end(), [](const Keyed& a, const Keyed& b) {
    if (a.entry.error.has_value() != b.entry.error.has_value()) return !a.entry.error.has_value();
    if (!a.entry.error && a.entry.average_f1 != b.entry.average_f1) return a.entry.average_f1 > b.entry.average_f1;
    if (a.part != b.part) return a.part < b.part;
    return a.entry.index < b.entry.index;
  });
  SearchResult out;
  out.ranked.reserve(all.size());
  for (auto& k : all) out.ranked.push_back(std::move(k.entry));
  return out;
}

nlohmann::json to_json(const SearchResult& result) {
  nlohmann::json ranked = nlohmann::json::array();
  for (std::size_t r = 0; r < result.ranked.size(); ++r) {
    const auto& e = result.ranked[r];
    nlohmann::json j{{"rank", r + 1}, {"index", e.index}, {"config", e.config}, {"average_f1", e.average_f1}};
    if (e.report) j["report"] = to_json(*e.report);
    if (e.error) j["error"] = *e.error;
    ranked.push_back(std::move(j));
  }
  nlohmann::json out{{"runs", result.ranked.size()}, {"failures", result.failures()}, {"ranked", std::move(ranked)}};
  if (!result.ranked.empty()) out["best_index"] = result.best().index;
  return out;
}

void write_search_csv(std::ostream& out, const SearchResult& result) {
  csv::write_record(out, {"rank", "index", "strategy", "batch_size", "epochs", "learning_rate", "weight_decay",
                          "famo_alpha", "famo_gamma", "average_f1", "error"});
  for (std::size_t r = 0; r < result.ranked.size(); ++r) {
    const auto& e = result.ranked[r];
    const auto& c = e.config;
    csv::write_record(out, {std::to_string(r + 1), std::to_string(e.index), std::string(to_string(c.strategy)),
                            std::to_string(c.batch_size), std::to_string(c.epochs), num(c.learning_rate),
                            num(c.weight_decay), c.famo_alpha ? num(*c.famo_alpha) : "",
                            c.famo_gamma ? num(*c.famo_gamma) : "", e.error ? "" : num(e.average_f1),
                            e.error.value_or("")});
  }
}

}  // namespace ccl
