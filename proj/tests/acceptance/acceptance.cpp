// Acceptance suite: one PASS/FAIL line per criterion.
//
//   ccl_acceptance                 run all ten criteria
//   ccl_acceptance --criterion N   run one
//
// Exit status is nonzero when any executed criterion fails.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ccl/famo.hpp"
#include "ccl/metrics.hpp"
#include "ccl/search.hpp"
#include "ccl/trainer.hpp"
#include "support/process.hpp"
#include "support/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ccl;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double limit_s;  // 0: no runtime bound
  std::function<Outcome()> run;
};

std::string fmt(double v, int decimals = 1) { return format_fixed(v, decimals); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

testing::ProcessResult ccl_run(const std::string& args, const std::string& env = "") {
  return testing::run_command(env + " " CCL_BIN " " + args + " 2>/dev/null");
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("ccl_acceptance_" + tag + "_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

void save_csv(const std::string& path, const std::vector<LabeledComment>& rows) {
  std::ofstream out(path);
  write_dataset(out, rows, DatasetFormat::Csv);
}

// Published comparison table: per class P, R, F1 of the baseline, F1 of the
// best solution and the printed delta.
struct TableRow {
  Language language;
  const char* name;
  double p, r, f1;
  double best_f1;
  double printed_delta;
};

const std::vector<TableRow>& results_table() {
  static const std::vector<TableRow> rows{
      {Language::Java, "Summary", 87.3, 82.9, 85.0, 90.7, 5.7},
      {Language::Java, "Ownership", 100, 100, 100, 100, 0.0},
      {Language::Java, "Expand", 32.3, 44.4, 37.4, 50.2, 12.8},
      {Language::Java, "Usage", 91.1, 91.8, 86.2, 89.7, 3.5},
      {Language::Java, "Pointer", 73.8, 60.0, 69.2, 88.4, 18.9},
      {Language::Java, "Deprecation", 87.3, 82.9, 85.0, 80.0, -5.0},
      {Language::Java, "Rational", 16.2, 29.5, 20.9, 31.1, 12.2},
      {Language::Python, "Usage", 70.0, 73.5, 71.7, 78.0, 6.3},
      {Language::Python, "Parameters", 79.3, 81.2, 80.3, 84.2, 3.9},
      {Language::Python, "DevelopmentNotes", 24.3, 48.7, 32.5, 44.2, 11.7},
      {Language::Python, "Expand", 43.3, 76.5, 55.3, 56.9, 1.6},
      {Language::Python, "Summary", 64.8, 58.5, 61.5, 75.3, 13.8},
      {Language::Pharo, "KeyImplementations", 63.6, 65.1, 64.3, 65.1, 0.8},
      {Language::Pharo, "Example", 87.2, 90.3, 88.7, 90.7, 2.0},
      {Language::Pharo, "Responsibility", 59.6, 59.6, 59.6, 68.4, 8.8},
      {Language::Pharo, "ClassReference", 20.0, 50.0, 28.5, 66.7, 38.2},
      {Language::Pharo, "Intent", 71.8, 76.6, 74.1, 90.0, 15.9},
      {Language::Pharo, "KeyMessage", 68.0, 79.0, 73.1, 74.2, 1.1},
      {Language::Pharo, "Collaborators", 26.0, 60.0, 36.3, 54.5, 18.2},
  };
  return rows;
}

EvalReport table_report(bool best) {
  EvalReport out;
  for (const auto& row : results_table()) {
    if (out.languages.empty() || out.languages.back().language != row.language) {
      out.languages.push_back({row.language, {}});
    }
    ClassMetrics m;
    m.name = row.name;
    m.precision = best ? 0.0 : row.p;
    m.recall = best ? 0.0 : row.r;
    m.f1 = best ? row.best_f1 : row.f1;
    out.languages.back().classes.push_back(m);
  }
  return out;
}

// ---------------------------------------------------------------------------

Outcome dataset_statistics() {
  const auto table = testing::table_one();
  TempDir tmp("stats");
  std::vector<std::string> files;
  std::string mode;
  if (const char* dir = std::getenv("CCL_NLBSE25_DIR")) {
    mode = std::string("dataset files in ") + dir;
    for (const auto& t : table) {
      std::string found;
      for (const char* ext : {".csv", ".jsonl"}) {
        const auto p = fs::path(dir) / (std::string(to_string(t.language)) + ext);
        if (fs::exists(p)) found = p.string();
      }
      if (found.empty()) return {false, "no " + std::string(to_string(t.language)) + ".csv/.jsonl in " + dir};
      files.push_back(found);
    }
  } else {
    // Without the real files, counts-faithful fixtures rebuilt from the
    // published per-class positives stand in; this checks the stats pipeline,
    // not the dataset itself.
    mode = "count-faithful fixtures (set CCL_NLBSE25_DIR for the real files)";
    for (std::size_t l = 0; l < table.size(); ++l) {
      const auto& t = table[l];
      files.push_back(tmp / (std::string(to_string(t.language)) + ".csv"));
      save_csv(files.back(), testing::count_faithful_rows(t.language, t.total, t.positives, 100 + l));
    }
  }

  const auto start = std::chrono::steady_clock::now();
  std::size_t checked = 0;
  std::vector<std::string> misses;
  for (std::size_t l = 0; l < table.size(); ++l) {
    const auto& t = table[l];
    const auto r = ccl_run("stats --json --split all --dataset " + files[l] + " --language " +
                           std::string(to_string(t.language)));
    if (r.exit_code != 0) return {false, "ccl stats exited with " + std::to_string(r.exit_code)};
    const auto doc = json::parse(r.out);
    for (std::size_t c = 0; c < t.positives.size(); ++c) {
      const double pct = 100.0 * doc["classes"][c]["frequency"].get<double>();
      ++checked;
      if (std::abs(pct - t.printed_percent[c]) > 0.1 + 1e-9) {
        misses.push_back(std::string(to_string(t.language)) + "/" + doc["classes"][c]["name"].get<std::string>() +
                         " " + fmt(pct, 2) + " vs " + fmt(t.printed_percent[c]));
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::string detail = std::to_string(checked - misses.size()) + "/" + std::to_string(checked) +
                       " positive% within 0.1 pp, stats runtime " + fmt(secs, 2) + " s, source: " + mode;
  for (const auto& m : misses) detail += "; miss " + m;
  return {misses.empty() && checked == 19 && secs < 5.0, detail};
}

Outcome metric_arithmetic() {
  std::size_t checked = 0;
  std::vector<std::string> misses;
  for (const auto& row : results_table()) {
    if (row.language == Language::Java && std::string(row.name) == "Deprecation") continue;
    ++checked;
    const double f1 = f1_score(row.p, row.r);
    if (std::abs(f1 - row.f1) > 0.1 + 1e-9) {
      misses.push_back(std::string(to_string(row.language)) + "/" + row.name + " computes " + fmt(f1, 2) +
                       ", printed " + fmt(row.f1));
    }
  }
  const auto avg = averages(table_report(false));
  const double java = avg.per_language[0].f1;
  const double grand = avg.grand.f1;
  const bool avg_ok = std::abs(java - 69.1) <= 0.05 && std::abs(grand - 63.7) <= 0.05;
  std::string detail = std::to_string(checked - misses.size()) + "/" + std::to_string(checked) +
                       " baseline F1 recomputed within 0.1; Java average " + fmt(java, 3) + " (69.1), grand average " +
                       fmt(grand, 3) + " (63.7)";
  for (const auto& m : misses) detail += "; miss " + m;
  return {misses.empty() && avg_ok, detail};
}

Outcome delta_oracle() {
  const auto d = delta(table_report(true), table_report(false));
  const auto& rows = results_table();
  struct Spot {
    Language language;
    const char* name;
    const char* expected;
  };
  const std::vector<Spot> spots{{Language::Pharo, "ClassReference", "38.2"},
                                {Language::Java, "Deprecation", "-5.0"},
                                {Language::Java, "Pointer", "18.9"}};
  bool ok = true;
  std::string detail;
  for (const auto& s : spots) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].language != s.language || std::string(rows[i].name) != s.name) continue;
      const std::string got = format_fixed(d[i]);
      ok = ok && got == s.expected;
      detail += std::string(detail.empty() ? "" : ", ") + to_string(s.language).data() + "/" + s.name + " " + got +
                (got == s.expected ? " ok" : std::string(" (printed ") + s.expected + ")");
    }
  }
  std::size_t agree = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) agree += format_fixed(d[i]) == format_fixed(rows[i].printed_delta);
  detail += "; full column agrees in " + std::to_string(agree) + "/19";
  return {ok, detail};
}

Outcome grid_counts() {
  const Grid g;
  const auto ew = enumerate(g, Strategy::EW).size();
  const auto icf = enumerate(g, Strategy::ICF).size();
  const auto rbf = enumerate(g, Strategy::RBF).size();
  const auto famo = enumerate(g, Strategy::FAMO).size();
  return {ew == 180 && icf == 180 && rbf == 180 && famo == 1620,
          "EW " + std::to_string(ew) + ", ICF " + std::to_string(icf) + ", RBF " + std::to_string(rbf) + ", FAMO " +
              std::to_string(famo)};
}

Outcome gradient_correctness() {
  testing::Rng rng(20250107);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t C = 1 + rng.below(5);
    const std::size_t D = 1 + rng.below(16);
    const std::size_t B = 1 + rng.below(8);
    const auto inst = testing::random_gradcheck_instance(rng, C, D, B);
    worst = std::max(worst, testing::gradcheck_max_relative_error(inst));
  }
  std::ostringstream s;
  s << "100 instances, max relative error " << worst << " (< 1e-4)";
  return {worst < 1e-4, s.str()};
}

ClassStats stats_from_frequencies(const std::vector<double>& f) {
  ClassStats s;
  s.total = 1000;
  s.frequency = f;
  for (double v : f) {
    s.positives.push_back(static_cast<std::size_t>(std::lround(v * 1000)));
    s.negatives.push_back(s.total - s.positives.back());
  }
  return s;
}

Outcome weight_strategy_properties() {
  testing::Rng rng(6);
  std::size_t icf_bad = 0, multiset_bad = 0, order_bad = 0;
  double worst_icf = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t C = 1 + rng.below(10);
    std::vector<double> f;
    for (std::size_t c = 0; c < C; ++c) {
      f.push_back(c > 0 && rng.bernoulli(0.1) ? f[rng.below(c)] : rng.uniform(1e-4, 1.0));
    }
    const auto stats = stats_from_frequencies(f);
    const auto icf = icf_weights(stats);
    const auto rbf = rbf_weights(stats);
    for (std::size_t c = 0; c < C; ++c) {
      // 1/f rounds once, so the product can sit one ulp off 1.
      const double err = std::abs(icf.w[c] * f[c] - 1.0);
      worst_icf = std::max(worst_icf, err);
      icf_bad += err > 0x1.0p-52;
    }
    auto sf = f, sw = rbf.w;
    std::sort(sf.begin(), sf.end());
    std::sort(sw.begin(), sw.end());
    multiset_bad += sf != sw;
    const bool distinct = std::adjacent_find(sf.begin(), sf.end()) == sf.end();
    for (std::size_t a = 0; a < C; ++a) {
      for (std::size_t b = 0; b < C; ++b) {
        if (f[a] < f[b]) {
          order_bad += !(rbf.w[a] >= rbf.w[b]) || (distinct && !(rbf.w[a] > rbf.w[b]));
          order_bad += !(icf.w[a] > icf.w[b]);
        }
      }
    }
  }

  std::size_t ew_bad = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t C = 1 + rng.below(7);
    auto inst = testing::random_gradcheck_instance(rng, C, 1 + rng.below(16), 1 + rng.below(8));
    ModelParams a = inst.params, b = inst.params;
    apply_update(a, gradient(a, inst.batch, ew_weights(C)), 0.01, 0.001);
    apply_update(b, gradient(b, inst.batch), 0.01, 0.001);
    ew_bad += !(a == b);
  }
  std::ostringstream s;
  s << "1000 vectors: ICF max |w*f-1| " << worst_icf << " (" << icf_bad << " beyond 1 ulp), RBF multiset violations "
    << multiset_bad << ", order violations " << order_bad << "; EW vs unweighted step mismatches " << ew_bad
    << "/100";
  return {icf_bad == 0 && multiset_bad == 0 && order_bad == 0 && ew_bad == 0, s.str()};
}

Outcome famo_properties() {
  testing::Rng rng(7);
  std::size_t simplex_bad = 0;
  double worst_sum = 0.0;
  for (int seq = 0; seq < 10000; ++seq) {
    const std::size_t C = 2 + rng.below(6);
    auto state = FamoState::uniform(C, rng.uniform(0.0, 0.5), rng.uniform(0.0, 0.05));
    std::vector<double> loss(C);
    for (auto& l : loss) l = rng.uniform(0.1, 2.0);
    const int steps = 1 + static_cast<int>(rng.below(20));
    for (int k = 0; k <= steps; ++k) {
      state = famo_update(state, loss);
      const auto w = famo_weights(state).w;
      double sum = 0.0;
      bool positive = true;
      for (double v : w) {
        sum += v;
        positive = positive && v > 0.0 && std::isfinite(v);
      }
      worst_sum = std::max(worst_sum, std::abs(sum - static_cast<double>(C)));
      simplex_bad += !positive || std::abs(sum - static_cast<double>(C)) > 1e-9;
      for (auto& l : loss) l *= std::exp(rng.uniform(-0.3, 0.3));
    }
  }

  std::size_t direction_bad = 0;
  for (int t = 0; t < 1000; ++t) {
    auto state = FamoState::uniform(2, rng.uniform(0.001, 0.5), rng.uniform(0.0, 0.01));
    const std::vector<double> before{rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0)};
    state = famo_update(state, before);
    const auto w0 = famo_weights(state).w;
    // Class `slow` improves by a smaller factor than the other.
    const std::size_t slow = rng.below(2);
    const double fast_ratio = rng.uniform(0.3, 0.9);
    const double slow_ratio = fast_ratio + rng.uniform(0.01, 1.0 - fast_ratio);
    std::vector<double> after = before;
    after[slow] *= slow_ratio;
    after[1 - slow] *= fast_ratio;
    state = famo_update(state, after);
    const auto w1 = famo_weights(state).w;
    direction_bad += !(w1[slow] / w1[1 - slow] > w0[slow] / w0[1 - slow]);
  }

  std::size_t fixed_bad = 0;
  {
    auto state = FamoState::uniform(5, 0.25, 0.001);
    std::vector<double> loss{1.0, 0.5, 2.0, 0.8, 1.3};
    for (int k = 0; k <= 100; ++k) {
      state = famo_update(state, loss);
      for (double v : famo_weights(state).w) fixed_bad += std::abs(v - 1.0) > 1e-12;
      for (auto& l : loss) l *= 0.9;
    }
  }
  std::ostringstream s;
  s << "simplex violations " << simplex_bad << " in 10000 sequences (max |sum-C| " << worst_sum
    << "), directional failures " << direction_bad << "/1000, fixed-point deviations " << fixed_bad
    << " over 100 steps";
  return {simplex_bad == 0 && direction_bad == 0 && fixed_bad == 0, s.str()};
}

Outcome imbalance_effect() {
  // lr 5e-5 scaled by 2e4 (step 1.0), batch 8, 10 epochs, no decay.
  TrainConfig cfg;
  cfg.batch_size = 8;
  cfg.epochs = 10;
  cfg.learning_rate = 5e-5;
  cfg.lr_scale = 2e4;
  std::size_t wins = 0;
  std::string recalls;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto data = testing::imbalance_split(1000 + s, 500, 200);
    const auto stats = testing::stats_of(data.train);
    cfg.seed = s;
    cfg.strategy = Strategy::EW;
    const auto ew = train_examples(data.train, stats, cfg);
    cfg.strategy = Strategy::ICF;
    const auto icf = train_examples(data.train, stats, cfg);
    const auto ce = prf("minority", tally_confusion(ew.params, data.test)[0]);
    const auto ci = prf("minority", tally_confusion(icf.params, data.test)[0]);
    wins += ci.recall >= ce.recall;
    recalls += (recalls.empty() ? "" : " ") + fmt(ce.recall, 0) + "/" + fmt(ci.recall, 0);
  }
  return {wins >= 8, "ICF recall >= EW recall in " + std::to_string(wins) + "/10 seeds (EW/ICF %: " + recalls + ")"};
}

Outcome submission_score_check() {
  const std::string formula = std::string(CCL_SOURCE_DIR) + "/config/nlbse25_score.json";
  const auto with = ccl_run("score --json --f1 0.726 --runtime 11.6 --gflops 155300 --formula " + formula);
  if (with.exit_code != 0) return {false, "ccl score exited with " + std::to_string(with.exit_code)};
  const double score = json::parse(with.out)["score"].get<double>();
  const auto without = ccl_run("score --f1 0.726 --runtime 11.6 --gflops 155300");
  std::ostringstream s;
  s << "score " << score << " (0.44 +/- 0.005); without a formula exit " << without.exit_code;
  return {std::abs(score - 0.44) <= 0.005 && without.exit_code == 2, s.str()};
}

Outcome end_to_end_determinism() {
  TempDir tmp("determinism");
  const auto t = testing::table_one();
  const std::string data = tmp / "python.csv";
  save_csv(data, testing::count_faithful_rows(Language::Python, t[1].total, t[1].positives, 10));
  const std::string env = "SOURCE_DATE_EPOCH=1736208000";
  const std::string ckpt = tmp / "model.ccl";
  const std::string train = "train --dataset " + data +
                            " --language python --strategy famo --famo-alpha 0.025 --famo-gamma 0.001"
                            " --epochs 3 --lr-scale 2000 --seed 17 --out " + ckpt;

  if (ccl_run(train, env).exit_code != 0) return {false, "first train run failed"};
  const auto ckpt1 = slurp(ckpt), report1 = slurp(ckpt + ".report.json");
  if (ccl_run(train, env).exit_code != 0) return {false, "second train run failed"};
  const bool same_ckpt = slurp(ckpt) == ckpt1;
  const bool same_report = slurp(ckpt + ".report.json") == report1;

  const std::string grid = tmp / "grid.json";
  std::ofstream(grid) << R"({"batch_sizes":[4,8],"epochs":[1,2],"learning_rates":[5e-5],"weight_decays":[0.01],)"
                      << R"("famo_alphas":[0.025],"famo_gammas":[0.001]})";
  const std::string search = "search --json --strategy all --select-mode joint --lr-scale 2000 --dataset " + data +
                             " --language python --grid " + grid;
  const auto p1 = ccl_run(search + " --parallelism 1", env);
  const auto p8 = ccl_run(search + " --parallelism 8", env);
  if (p1.exit_code != 0 || p8.exit_code != 0) return {false, "search run failed"};
  const auto r1 = json::parse(p1.out)["result"], r8 = json::parse(p8.out)["result"];
  const bool same_search = r1 == r8;
  return {same_ckpt && same_report && same_search,
          std::string("checkpoint ") + (same_ckpt ? "identical" : "differs") + ", report " +
              (same_report ? "identical" : "differs") + ", search ranking (" + std::to_string(r1["ranked"].size()) +
              " runs) at parallelism 1 vs 8 " + (same_search ? "identical" : "differs")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria", "ccl_acceptance"};
  int only = 0;
  app.add_option("--criterion", only, "Run a single criterion (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "dataset statistics", 5.0, dataset_statistics},
      {2, "metric arithmetic", 1.0, metric_arithmetic},
      {3, "delta oracle", 0.0, delta_oracle},
      {4, "grid counts", 1.0, grid_counts},
      {5, "gradient correctness", 10.0, gradient_correctness},
      {6, "weight-strategy properties", 5.0, weight_strategy_properties},
      {7, "FAMO properties", 10.0, famo_properties},
      {8, "imbalance effect", 60.0, imbalance_effect},
      {9, "submission score", 0.0, submission_score_check},
      {10, "end-to-end determinism", 120.0, end_to_end_determinism},
  };

  bool all_pass = true;
  for (const auto& c : criteria) {
    if (only && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.limit_s == 0.0 || secs < c.limit_s;
    const bool pass = o.pass && in_time;
    all_pass = all_pass && pass;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.title << "): " << o.detail << " ["
              << fmt(secs, 2) << " s" << (c.limit_s > 0 ? ", limit " + fmt(c.limit_s, 0) + " s" : "")
              << (in_time ? "" : ", over limit") << "]" << std::endl;
  }
  return all_pass ? 0 : 1;
}
