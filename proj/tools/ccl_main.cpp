// ccl: class-imbalance toolkit for multi-label code-comment classification.
//
//   ccl stats     per-class positive/negative counts of a dataset
//   ccl weights   loss weights of a strategy, as JSON
//   ccl train     train a model, write checkpoint + report
//   ccl evaluate  per-class P/R/F1 of a checkpoint on a split
//   ccl search    grid search over hyperparameters
//   ccl score     competition submission score
//
// Exit codes: 0 ok, 2 input/validation error, 3 numerical failure,
// 4 search finished with failed runs.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ccl/checkpoint.hpp"
#include "ccl/corpus.hpp"
#include "ccl/error.hpp"
#include "ccl/featurizer.hpp"
#include "ccl/hash.hpp"
#include "ccl/metrics.hpp"
#include "ccl/search.hpp"
#include "ccl/trainer.hpp"
#include "ccl/weighting.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kToolVersion = "0.1.0";
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitPartialSearch = 4;

// ---------------------------------------------------------------------------
// Manifest and config handling

std::string iso_utc(std::time_t t) {
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// SOURCE_DATE_EPOCH pins timestamps for reproducible builds of reports.
std::string timestamp_now() {
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    return iso_utc(static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10)));
  }
  return iso_utc(std::chrono::system_clock::to_time_t(std::chrono::system_clock::now()));
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json dataset_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ccl::InputError("cannot open '" + path + "'");
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return {{"path", path}, {"bytes", bytes.size()}, {"fnv1a64_mix", hex64(ccl::hash64(bytes))}};
}

// Effective value of every option of `sub`: given on the command line, or
// the default. Flags become booleans; everything else stays a string so the
// manifest can be fed back through the parser unchanged.
json effective_config(const CLI::App& sub) {
  json cfg = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    if (opt->get_type_size() == 0) {
      cfg[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      cfg[name] = opt->results().back();
    } else if (!opt->get_default_str().empty()) {
      cfg[name] = opt->get_default_str();
    }
  }
  return cfg;
}

struct Manifest {
  json body;
  std::string started;

  json without_timestamps() const { return body; }
  json with_timestamps() const {
    json m = body;
    m["timestamps"] = {{"started", started}, {"finished", timestamp_now()}};
    return m;
  }
};

Manifest make_manifest(const CLI::App& sub, const std::vector<std::string>& datasets, std::optional<std::uint64_t> seed) {
  Manifest m;
  m.started = timestamp_now();
  json ds = json::array();
  for (const auto& d : datasets) ds.push_back(dataset_digest(d));
  m.body = {{"tool", "ccl"},
            {"version", kToolVersion},
            {"command", sub.get_name()},
            {"config", effective_config(sub)},
            {"datasets", std::move(ds)}};
  if (seed) m.body["seed"] = *seed;
  return m;
}

bool flag_given(const std::vector<std::string>& args, const std::string& name) {
  const std::string flag = "--" + name;
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

// Expands `--config FILE` into explicit flags for every key not already on the
// command line, so precedence is flag > config file > built-in default.
// FILE may be a flat {flag: value} object, a manifest, or any report that
// embeds one under "manifest".
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!path) return args;

  std::ifstream in(*path);
  if (!in) throw ccl::InputError("cannot open config '" + *path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ccl::InputError("config '" + *path + "': " + e.what());
  }
  if (doc.contains("manifest")) doc = doc.at("manifest");
  if (doc.contains("config") && doc.at("config").is_object()) doc = doc.at("config");
  if (!doc.is_object()) throw ccl::InputError("config '" + *path + "' is not a JSON object");

  for (const auto& [key, value] : doc.items()) {
    if (flag_given(args, key)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back("--" + key);
    } else if (value.is_string()) {
      args.push_back("--" + key);
      args.push_back(value.get<std::string>());
    } else if (!value.is_null()) {
      args.push_back("--" + key);
      args.push_back(value.dump());
    }
  }
  return args;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ccl::InputError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ccl::InputError("failed writing '" + path + "'");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ccl::InputError("cannot open '" + path + "'");
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw ccl::InputError("'" + path + "': " + e.what());
  }
}

// Sends JSON to --out if given, else to stdout.
void emit_json(const json& doc, const std::string& out_path) {
  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text(out_path, text);
  }
}

std::string thousands(std::size_t v) {
  std::string digits = std::to_string(v);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i && (digits.size() - i) % 3 == 0) out.push_back(',');
    out.push_back(digits[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shared option groups

struct FeaturizerFlags {
  std::uint32_t dims = 1u << 18;
  int ngram_max = 1;
  bool no_lowercase = false;
  bool no_l2 = false;
  std::uint64_t hash_seed = 0;

  void attach(CLI::App* sub) {
    sub->add_option("--dims", dims, "Hashed feature dimension (power of two)");
    sub->add_option("--ngram-max", ngram_max, "Largest n-gram (1 or 2)");
    sub->add_flag("--no-lowercase", no_lowercase, "Keep token case");
    sub->add_flag("--no-l2", no_l2, "Skip L2 normalization of feature vectors");
    sub->add_option("--hash-seed", hash_seed, "Feature hash seed");
  }

  ccl::FeaturizerConfig config() const {
    ccl::FeaturizerConfig c;
    c.dims = dims;
    c.ngram_max = ngram_max;
    c.lowercase = !no_lowercase;
    c.l2_normalize = !no_l2;
    c.seed = hash_seed;
    c.validate();
    return c;
  }
};

struct DatasetFlags {
  std::string dataset;
  std::string language;

  void attach(CLI::App* sub, bool language_required = true, bool dataset_required = true) {
    auto* ds = sub->add_option("--dataset", dataset, "Dataset file (.csv or .jsonl)");
    if (dataset_required) ds->required();
    auto* opt = sub->add_option("--language", language, "java, python or pharo");
    if (language_required) opt->required();
  }
};

std::vector<ccl::LabeledComment> weight_source(const std::vector<ccl::LabeledComment>& rows,
                                               const std::string& stats_split) {
  if (stats_split == "all") return rows;
  if (stats_split == "train") return ccl::filter_split(rows, ccl::Split::Train);
  throw ccl::InputError("--stats-split must be train or all");
}

// ---------------------------------------------------------------------------
// Subcommands

struct StatsCmd {
  DatasetFlags data;
  std::string split = "all";
  bool as_json = false;
  std::string out;

  void attach(CLI::App* sub) {
    data.attach(sub);
    sub->add_option("--split", split, "Rows to count: all, train or test");
    sub->add_option("--seed", seed_unused, "Accepted for symmetry; unused");
    sub->add_flag("--json", as_json, "Print JSON");
    sub->add_option("--out", out, "Write output to this file");
  }
  std::uint64_t seed_unused = 0;

  int run(const CLI::App& sub) {
    const auto manifest = make_manifest(sub, {data.dataset}, std::nullopt);
    const auto language = ccl::parse_language(data.language);
    auto rows = ccl::load_dataset(data.dataset, language);
    if (split == "train") rows = ccl::filter_split(rows, ccl::Split::Train);
    else if (split == "test") rows = ccl::filter_split(rows, ccl::Split::Test);
    else if (split != "all") throw ccl::InputError("--split must be all, train or test");
    const auto stats = ccl::compute_class_stats(rows);
    const auto& names = ccl::catalog(language).class_names;

    json classes = json::array();
    for (std::size_t c = 0; c < names.size(); ++c) {
      classes.push_back({{"name", names[c]},
                         {"positives", stats.positives[c]},
                         {"negatives", stats.negatives[c]},
                         {"frequency", stats.frequency[c]},
                         {"positive_percent", ccl::format_fixed(100.0 * stats.frequency[c])}});
    }
    const json doc{{"language", ccl::to_string(language)}, {"split", split},        {"total", stats.total},
                   {"classes", std::move(classes)},         {"manifest", manifest.with_timestamps()}};
    if (as_json) {
      emit_json(doc, out);
      return 0;
    }
    std::ostringstream table;
    char line[160];
    std::snprintf(line, sizeof line, "%-20s %10s %10s %10s\n", "Label", "positive", "negative", "positive%");
    table << line;
    for (std::size_t c = 0; c < names.size(); ++c) {
      std::snprintf(line, sizeof line, "%-20s %10s %10s %9s%%\n", names[c].c_str(),
                    thousands(stats.positives[c]).c_str(), thousands(stats.negatives[c]).c_str(),
                    ccl::format_fixed(100.0 * stats.frequency[c]).c_str());
      table << line;
    }
    table << "rows: " << thousands(stats.total) << "\n";
    if (out.empty()) std::cout << table.str();
    else write_text(out, table.str());
    return 0;
  }
};

struct WeightsCmd {
  DatasetFlags data;
  std::string strategy = "ew";
  std::string stats_split = "train";
  std::string out;

  void attach(CLI::App* sub) {
    data.attach(sub);
    sub->add_option("--strategy", strategy, "ew, icf, rbf or famo (initial FAMO weights)");
    sub->add_option("--stats-split", stats_split, "Rows the frequencies come from: train or all");
    sub->add_flag("--json", json_unused, "Output is always JSON");
    sub->add_option("--out", out, "Write output to this file");
  }
  bool json_unused = false;

  int run(const CLI::App& sub) {
    const auto manifest = make_manifest(sub, {data.dataset}, std::nullopt);
    const auto language = ccl::parse_language(data.language);
    const auto strat = ccl::parse_strategy(strategy);
    const auto rows = ccl::load_dataset(data.dataset, language);
    const auto stats = ccl::compute_class_stats(weight_source(rows, stats_split));
    const auto weights = ccl::static_weights(strat, stats);
    const auto& names = ccl::catalog(language).class_names;
    json classes = json::array();
    for (std::size_t c = 0; c < names.size(); ++c) {
      classes.push_back({{"name", names[c]}, {"frequency", stats.frequency[c]}, {"weight", weights.w[c]}});
    }
    emit_json({{"language", ccl::to_string(language)},
               {"strategy", ccl::to_string(strat)},
               {"stats_split", stats_split},
               {"classes", std::move(classes)},
               {"manifest", manifest.with_timestamps()}},
              out);
    return 0;
  }
};

struct TrainFlags {
  std::string strategy = "ew";
  std::size_t batch_size = 8;
  std::size_t epochs = 10;
  double lr = 5e-5;
  double lr_scale = 1.0;
  double weight_decay = 0.0;
  std::optional<double> famo_alpha;
  std::optional<double> famo_gamma;
  std::uint64_t seed = 0;
  std::string stats_split = "train";

  void attach(CLI::App* sub, bool per_run) {
    sub->add_option("--strategy", strategy,
                    per_run ? "ew, icf, rbf or famo" : "ew, icf, rbf, famo, or all");
    if (per_run) {
      sub->add_option("--batch-size", batch_size, "Mini-batch size");
      sub->add_option("--epochs", epochs, "Passes over the training split");
      sub->add_option("--lr", lr, "Learning rate (before --lr-scale)");
      sub->add_option("--weight-decay", weight_decay, "Decoupled weight decay");
      sub->add_option("--famo-alpha", famo_alpha, "FAMO step size");
      sub->add_option("--famo-gamma", famo_gamma, "FAMO logit decay");
    }
    sub->add_option("--lr-scale", lr_scale, "Multiplier applied to every learning rate");
    sub->add_option("--seed", seed, "Random seed (search: base seed, run i uses seed + i)");
    sub->add_option("--stats-split", stats_split, "Rows static weights are computed from: train or all");
  }

  ccl::TrainConfig config() const {
    ccl::TrainConfig c;
    c.batch_size = batch_size;
    c.epochs = epochs;
    c.learning_rate = lr;
    c.lr_scale = lr_scale;
    c.weight_decay = weight_decay;
    c.strategy = ccl::parse_strategy(strategy);
    c.famo_alpha = famo_alpha;
    c.famo_gamma = famo_gamma;
    c.seed = seed;
    return c;
  }

  // Search template: strategy and per-run axes come from the grid.
  ccl::TrainConfig config_base() const {
    ccl::TrainConfig c;
    c.lr_scale = lr_scale;
    c.seed = seed;
    return c;
  }
};

struct TrainCmd {
  DatasetFlags data;
  TrainFlags train;
  FeaturizerFlags feat;
  bool record_batches = false;
  bool as_json = false;
  std::string out;
  std::string report;

  void attach(CLI::App* sub) {
    data.attach(sub);
    train.attach(sub, true);
    feat.attach(sub);
    sub->add_flag("--record-batches", record_batches, "Keep per-batch losses and weights in the history");
    sub->add_flag("--json", as_json, "Print the report JSON to stdout");
    sub->add_option("--out", out, "Checkpoint path")->required();
    sub->add_option("--report", report, "Report path (default: <out>.report.json)");
  }

  int run(const CLI::App& sub) {
    const auto manifest = make_manifest(sub, {data.dataset}, train.seed);
    const auto language = ccl::parse_language(data.language);
    const auto featurizer = feat.config();
    auto config = train.config();
    config.record_batches = record_batches;
    const auto rows = ccl::load_dataset(data.dataset, language);
    const auto train_rows = ccl::filter_split(rows, ccl::Split::Train);
    const auto test_rows = ccl::filter_split(rows, ccl::Split::Test);
    if (train_rows.empty()) throw ccl::InputError("dataset has no train rows");

    const auto stats = ccl::compute_class_stats(weight_source(rows, train.stats_split));
    const auto examples = ccl::featurize_rows(train_rows, featurizer);
    const auto result = ccl::train_examples(examples, stats, config);

    ccl::Checkpoint ckpt{result.params, language, featurizer, config, result.initial_weights,
                         manifest.without_timestamps()};
    ccl::save_checkpoint(out, ckpt);

    json evaluation = nullptr;
    if (!test_rows.empty()) evaluation = ccl::to_json(ccl::evaluate(result.params, test_rows, featurizer));
    const json doc{{"manifest", manifest.with_timestamps()},
                   {"train_config", config},
                   {"featurizer", featurizer},
                   {"initial_weights", result.initial_weights.w},
                   {"history", ccl::to_json(result.history)},
                   {"evaluation", evaluation}};
    write_text(report.empty() ? out + ".report.json" : report, doc.dump(2) + "\n");
    if (as_json) std::cout << doc.dump(2) << "\n";
    return 0;
  }
};

void print_report_table(std::ostream& os, const ccl::EvalReport& report, const ccl::EvalReport* baseline) {
  std::ostringstream csv;
  ccl::write_report_csv(csv, report, baseline);
  std::istringstream lines(csv.str());
  std::string line;
  while (std::getline(lines, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    cells.resize(6);
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-8s %-20s %6s %6s %6s %7s\n", cells[0].c_str(), cells[1].c_str(),
                  cells[2].c_str(), cells[3].c_str(), cells[4].c_str(), cells[5].c_str());
    os << buf;
  }
}

ccl::EvalReport load_baseline(const std::string& path) {
  if (ccl::detect_format(path) == ccl::DatasetFormat::JsonLines) {
    json j = read_json_file(path);
    if (j.contains("evaluation")) j = j.at("evaluation");
    if (j.contains("report")) j = j.at("report");
    return ccl::eval_report_from_json(j);
  }
  std::ifstream in(path);
  if (!in) throw ccl::InputError("cannot open baseline '" + path + "'");
  return ccl::read_baseline_csv(in);
}

// Keeps only the baseline languages that the report covers, in report order.
ccl::EvalReport align_baseline(const ccl::EvalReport& baseline, const ccl::EvalReport& report) {
  ccl::EvalReport out;
  for (const auto& lang : report.languages) {
    auto it = std::find_if(baseline.languages.begin(), baseline.languages.end(),
                           [&](const auto& b) { return b.language == lang.language; });
    if (it == baseline.languages.end()) {
      throw ccl::InputError("baseline has no " + std::string(ccl::to_string(lang.language)) + " rows");
    }
    out.languages.push_back(*it);
  }
  return out;
}

struct EvaluateCmd {
  std::string model;
  std::string dataset;
  std::string language;
  std::string split = "test";
  std::string baseline;
  std::string csv_path;
  bool as_json = false;
  std::string out;

  void attach(CLI::App* sub) {
    sub->add_option("--model", model, "Checkpoint written by train")->required();
    sub->add_option("--dataset", dataset, "Dataset file (.csv or .jsonl)")->required();
    sub->add_option("--language", language, "Must match the checkpoint if given");
    sub->add_option("--split", split, "Rows to evaluate: test, train or all");
    sub->add_option("--baseline", baseline, "Baseline report (.json) or table (.csv) for dF1");
    sub->add_option("--csv", csv_path, "Also write a table-shaped CSV here");
    sub->add_option("--seed", seed_unused, "Accepted for symmetry; unused");
    sub->add_flag("--json", as_json, "Print JSON");
    sub->add_option("--out", out, "Write output to this file");
  }
  std::uint64_t seed_unused = 0;

  int run(const CLI::App& sub) {
    const auto manifest = make_manifest(sub, {dataset, model}, std::nullopt);
    const auto ckpt = ccl::load_checkpoint(model);
    if (!language.empty() && ccl::parse_language(language) != ckpt.language) {
      throw ccl::InputError("--language does not match the checkpoint language");
    }
    auto rows = ccl::load_dataset(dataset, ckpt.language);
    if (split == "test") rows = ccl::filter_split(rows, ccl::Split::Test);
    else if (split == "train") rows = ccl::filter_split(rows, ccl::Split::Train);
    else if (split != "all") throw ccl::InputError("--split must be test, train or all");
    const auto report = ccl::evaluate(ckpt.params, rows, ckpt.featurizer);

    std::optional<ccl::EvalReport> base;
    if (!baseline.empty()) base = align_baseline(load_baseline(baseline), report);
    const ccl::EvalReport* base_ptr = base ? &*base : nullptr;

    if (!csv_path.empty()) {
      std::ostringstream csv;
      ccl::write_report_csv(csv, report, base_ptr);
      write_text(csv_path, csv.str());
    }
    if (as_json) {
      emit_json({{"manifest", manifest.with_timestamps()}, {"evaluation", ccl::to_json(report, base_ptr)}}, out);
    } else {
      std::ostringstream table;
      print_report_table(table, report, base_ptr);
      if (out.empty()) std::cout << table.str();
      else write_text(out, table.str());
    }
    return 0;
  }
};

struct SearchCmd {
  DatasetFlags data;
  TrainFlags train;
  FeaturizerFlags feat;
  int parallelism = 1;
  std::string grid_path;
  std::string select_mode = "per-strategy";
  bool dry_run = false;
  bool as_json = false;
  std::string out;
  std::string csv_path;

  void attach(CLI::App* sub) {
    data.attach(sub, false, false);
    train.attach(sub, false);
    feat.attach(sub);
    if (const char* env = std::getenv("CCL_PARALLELISM")) parallelism = std::max(1, std::atoi(env));
    sub->add_option("--parallelism", parallelism, "Concurrent runs (default: $CCL_PARALLELISM or 1)");
    sub->add_option("--grid", grid_path, "JSON file overriding grid axes");
    sub->add_option("--select-mode", select_mode, "per-strategy or joint (for --strategy all)");
    sub->add_flag("--dry-run", dry_run, "Only count configurations");
    sub->add_flag("--json", as_json, "Print the report JSON to stdout");
    sub->add_option("--out", out, "Report path");
    sub->add_option("--csv", csv_path, "Ranked CSV summary path");
  }

  std::vector<ccl::Strategy> strategies() const {
    std::string s = train.strategy;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "all") return {ccl::Strategy::EW, ccl::Strategy::ICF, ccl::Strategy::RBF, ccl::Strategy::FAMO};
    return {ccl::parse_strategy(s)};
  }

  int run(const CLI::App& sub) {
    if (select_mode != "per-strategy" && select_mode != "joint") {
      throw ccl::InputError("--select-mode must be per-strategy or joint");
    }
    const ccl::Grid grid = grid_path.empty() ? ccl::Grid{} : ccl::grid_from_json(read_json_file(grid_path));
    const auto strats = strategies();
    ccl::TrainConfig base = train.config_base();

    if (dry_run) {
      std::size_t total = 0;
      for (auto s : strats) total += ccl::enumerate(grid, s, base).size();
      std::cout << total << " configurations\n";
      return 0;
    }
    if (data.dataset.empty() || data.language.empty()) throw ccl::InputError("search needs --dataset and --language");

    const auto manifest = make_manifest(sub, {data.dataset}, train.seed);
    const auto language = ccl::parse_language(data.language);
    const auto featurizer = feat.config();
    const auto rows = ccl::load_dataset(data.dataset, language);
    const auto train_rows = ccl::filter_split(rows, ccl::Split::Train);
    const auto eval_rows = ccl::filter_split(rows, ccl::Split::Test);
    if (train_rows.empty() || eval_rows.empty()) throw ccl::InputError("search needs both train and test rows");
    const auto stats = ccl::compute_class_stats(weight_source(rows, train.stats_split));
    const auto train_set = ccl::featurize_rows(train_rows, featurizer);
    const auto eval_set = ccl::featurize_rows(eval_rows, featurizer);

    std::vector<ccl::SearchResult> parts;
    json per_strategy = json::array();
    for (auto s : strats) {
      const auto configs = ccl::enumerate(grid, s, base);
      parts.push_back(ccl::run_search(train_set, stats, eval_set, language, configs, parallelism));
      per_strategy.push_back({{"strategy", ccl::to_string(s)}, {"result", ccl::to_json(parts.back())}});
    }

    json doc{{"manifest", manifest.with_timestamps()},
             {"grid", ccl::to_json(grid)},
             {"featurizer", featurizer},
             {"select_mode", select_mode},
             {"evaluation_split", "test"},
             {"note", "configurations are selected on the test split, so best scores are optimistic"}};
    std::size_t failures = 0;
    for (const auto& p : parts) failures += p.failures();
    ccl::SearchResult joint;
    if (select_mode == "joint") {
      joint = ccl::merge_results(parts);
      doc["result"] = ccl::to_json(joint);
    } else {
      doc["results"] = per_strategy;
    }

    if (!out.empty()) write_text(out, doc.dump(2) + "\n");
    if (!csv_path.empty()) {
      std::ostringstream csv;
      ccl::write_search_csv(csv, select_mode == "joint" ? joint : ccl::merge_results(parts));
      write_text(csv_path, csv.str());
    }
    if (as_json) {
      std::cout << doc.dump(2) << "\n";
    } else {
      for (std::size_t i = 0; i < parts.size(); ++i) {
        const auto& best = parts[i].best();
        std::cout << ccl::to_string(strats[i]) << ": " << parts[i].ranked.size() << " runs, best average F1 "
                  << ccl::format_fixed(best.average_f1) << " (run " << best.index << ", batch "
                  << best.config.batch_size << ", epochs " << best.config.epochs << ", lr "
                  << best.config.learning_rate << ", wd " << best.config.weight_decay << ")\n";
      }
      if (select_mode == "joint") {
        const auto& best = joint.best();
        std::cout << "joint best: " << ccl::to_string(best.config.strategy) << " run " << best.index
                  << ", average F1 " << ccl::format_fixed(best.average_f1) << "\n";
      }
    }
    if (failures > 0) {
      std::cerr << "ccl: " << failures << " search run(s) failed\n";
      return kExitPartialSearch;
    }
    return 0;
  }
};

struct ScoreCmd {
  std::optional<double> f1;
  std::optional<double> runtime;
  std::optional<double> gflops;
  std::string formula;
  bool as_json = false;

  void attach(CLI::App* sub) {
    sub->add_option("--f1", f1, "Average F1 as a fraction in [0,1]")->required();
    sub->add_option("--runtime", runtime, "Average runtime in seconds")->required();
    sub->add_option("--gflops", gflops, "Average GFLOPS")->required();
    sub->add_option("--formula", formula, "JSON score formula (weights and normalization constants)");
    sub->add_flag("--json", as_json, "Print JSON");
  }

  int run(const CLI::App&) {
    if (formula.empty()) throw ccl::InputError("no score formula given (--formula FILE); coefficients are never guessed");
    const auto f = ccl::load_score_formula(formula);
    const double score = ccl::submission_score(*f1, *runtime, *gflops, f);
    if (as_json) {
      std::cout << json{{"score", score}, {"f1", *f1}, {"runtime_s", *runtime}, {"gflops", *gflops}}.dump(2) << "\n";
    } else {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.4f", score);
      std::cout << "submission score: " << buf << " (" << ccl::format_fixed(score, 2) << ")\n";
    }
    return 0;
  }
};

int run(std::vector<std::string> args) {
  args = expand_config(std::move(args));

  CLI::App app{"Class-imbalance toolkit for multi-label code-comment classification", "ccl"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  app.option_defaults()->always_capture_default();

  StatsCmd stats;
  WeightsCmd weights;
  TrainCmd train;
  EvaluateCmd evaluate;
  SearchCmd search;
  ScoreCmd score;

  auto* s_stats = app.add_subcommand("stats", "Per-class positive/negative counts");
  auto* s_weights = app.add_subcommand("weights", "Loss weights of a strategy as JSON");
  auto* s_train = app.add_subcommand("train", "Train a model on the train split");
  auto* s_eval = app.add_subcommand("evaluate", "Evaluate a checkpoint");
  auto* s_search = app.add_subcommand("search", "Grid search over hyperparameters");
  auto* s_score = app.add_subcommand("score", "Competition submission score");
  for (auto* s : {s_stats, s_weights, s_train, s_eval, s_search, s_score}) {
    s->option_defaults()->always_capture_default();
  }
  stats.attach(s_stats);
  weights.attach(s_weights);
  train.attach(s_train);
  evaluate.attach(s_eval);
  search.attach(s_search);
  score.attach(s_score);

  // CLI11 consumes a reversed argument vector.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  if (s_stats->parsed()) return stats.run(*s_stats);
  if (s_weights->parsed()) return weights.run(*s_weights);
  if (s_train->parsed()) return train.run(*s_train);
  if (s_eval->parsed()) return evaluate.run(*s_eval);
  if (s_search->parsed()) return search.run(*s_search);
  return score.run(*s_score);
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return run(std::move(args));
  } catch (const ccl::NumericalError& e) {
    std::cerr << "ccl: numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const ccl::InputError& e) {
    std::cerr << "ccl: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "ccl: " << e.what() << "\n";
    return kExitInput;
  }
}
