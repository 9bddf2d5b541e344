#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccl/corpus.hpp"
#include "ccl/kernels.hpp"

namespace ccl {

// Precision, recall and F1 in percent, full precision.
struct ClassMetrics {
  std::string name;
  std::optional<ClassCounts> counts;  // absent for reports built from published P/R/F1
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct LanguageReport {
  Language language = Language::Java;
  std::vector<ClassMetrics> classes;
};

struct EvalReport {
  std::vector<LanguageReport> languages;

  std::size_t class_count() const noexcept;
};

struct MeanMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct Averages {
  std::vector<MeanMetrics> per_language;  // parallel to EvalReport::languages
  MeanMetrics grand;                      // over all classes of all languages
};

// 2PR/(P+R), 0 when P + R == 0.
double f1_score(double precision, double recall) noexcept;

// P = TP/(TP+FP), R = TP/(TP+FN) in percent; any zero denominator gives 0.
ClassMetrics prf(const std::string& name, const ClassCounts& counts);

LanguageReport make_language_report(Language language, std::span<const ClassCounts> counts);

// Unweighted means of P, R, F1. Throws InputError when the report has no classes.
Averages averages(const EvalReport& report);

// report.F1_c - baseline.F1_c, flattened in report order. Class catalogs must match.
std::vector<double> delta(const EvalReport& report, const EvalReport& baseline);

// Round half away from zero at `decimals` places, matching published tables.
double round_half_up(double value, int decimals = 1);
std::string format_fixed(double value, int decimals = 1);

// Competition score: f1_weight * F1 + runtime_weight * clamp01((max_runtime - t) / max_runtime)
//                    + compute_weight * clamp01((max_gflops - g) / max_gflops).
// A term with zero weight may omit its normalization constant.
struct ScoreFormula {
  double f1_weight = 0.0;
  double runtime_weight = 0.0;
  double max_runtime_s = 0.0;
  double compute_weight = 0.0;
  double max_gflops = 0.0;
  bool clamp_terms = true;

  void validate() const;
};

ScoreFormula score_formula_from_json(const nlohmann::json& j);
ScoreFormula load_score_formula(const std::string& path);

// avg_f1 is a fraction in [0, 1].
double submission_score(double avg_f1, double runtime_s, double gflops, const ScoreFormula& formula);

nlohmann::json to_json(const EvalReport& report, const EvalReport* baseline = nullptr);
EvalReport eval_report_from_json(const nlohmann::json& j);

// Table-shaped CSV: language,class,P,R,F1,dF1 with one-decimal values; dF1 is
// empty without a baseline. Average rows are appended per language and overall.
void write_report_csv(std::ostream& out, const EvalReport& report, const EvalReport* baseline = nullptr);

// Baseline table with columns language,class,P,R,F1 (percent).
EvalReport read_baseline_csv(std::istream& in);

}  // namespace ccl
