#include "ccl/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "ccl/csv.hpp"
#include "ccl/error.hpp"

namespace ccl {

namespace {

double percent(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

std::string key(std::string_view name) {
  std::string out;
  for (unsigned char c : name) {
    if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

MeanMetrics mean_of(std::span<const ClassMetrics> classes) {
  MeanMetrics m;
  for (const auto& c : classes) {
    m.precision += c.precision;
    m.recall += c.recall;
    m.f1 += c.f1;
  }
  const double n = static_cast<double>(classes.size());
  m.precision /= n;
  m.recall /= n;
  m.f1 /= n;
  return m;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

std::size_t EvalReport::class_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : languages) n += l.classes.size();
  return n;
}

double f1_score(double precision, double recall) noexcept {
  const double s = precision + recall;
  return s == 0.0 ? 0.0 : 2.0 * precision * recall / s;
}

ClassMetrics prf(const std::string& name, const ClassCounts& counts) {
  ClassMetrics m;
  m.name = name;
  m.counts = counts;
  m.precision = percent(counts.tp, counts.tp + counts.fp);
  m.recall = percent(counts.tp, counts.tp + counts.fn);
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

LanguageReport make_language_report(Language language, std::span<const ClassCounts> counts) {
  const auto& names = catalog(language).class_names;
  if (counts.size() != names.size()) throw InputError("confusion counts do not match the class catalog");
  LanguageReport out{language, {}};
  for (std::size_t c = 0; c < counts.size(); ++c) out.classes.push_back(prf(names[c], counts[c]));
  return out;
}

Averages averages(const EvalReport& report) {
  std::vector<ClassMetrics> all;
  Averages out;
  for (const auto& lang : report.languages) {
    if (lang.classes.empty()) throw InputError("language report without classes");
    out.per_language.push_back(mean_of(lang.classes));
    all.insert(all.end(), lang.classes.begin(), lang.classes.end());
  }
  if (all.empty()) throw InputError("averages of an empty report");
  out.grand = mean_of(all);
  return out;
}

std::vector<double> delta(const EvalReport& report, const EvalReport& baseline) {
  if (report.languages.size() != baseline.languages.size()) throw InputError("reports cover different languages");
  std::vector<double> out;
  for (std::size_t l = 0; l < report.languages.size(); ++l) {
    const auto& a = report.languages[l];
    const auto& b = baseline.languages[l];
    if (a.language != b.language || a.classes.size() != b.classes.size()) {
      throw InputError("class catalogs differ between report and baseline");
    }
    for (std::size_t c = 0; c < a.classes.size(); ++c) {
      if (key(a.classes[c].name) != key(b.classes[c].name)) {
        throw InputError("class '" + a.classes[c].name + "' does not match baseline class '" + b.classes[c].name +
                         "'");
      }
      out.push_back(a.classes[c].f1 - b.classes[c].f1);
    }
  }
  return out;
}

double round_half_up(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  // The nudge absorbs representation error such as 85.05 -> 85.0499999.
  const double scaled = value * scale;
  return std::round(scaled + std::copysign(1e-9 * std::max(1.0, std::abs(scaled)), scaled)) / scale;
}

std::string format_fixed(double value, int decimals) {
  double r = round_half_up(value, decimals);
  if (r == 0.0) r = 0.0;  // no "-0.0"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, r);
  return buf;
}

void ScoreFormula::validate() const {
  auto check = [](double weight, double max, const char* what) {
    if (!std::isfinite(weight)) throw InputError(std::string("score formula: non-finite ") + what + " weight");
    if (weight != 0.0 && !(max > 0.0)) {
      throw InputError(std::string("score formula: ") + what + " term needs a positive maximum");
    }
  };
  if (!std::isfinite(f1_weight)) throw InputError("score formula: non-finite f1 weight");
  check(runtime_weight, max_runtime_s, "runtime");
  check(compute_weight, max_gflops, "compute");
}

ScoreFormula score_formula_from_json(const nlohmann::json& j) {
  ScoreFormula f;
  try {
    f.f1_weight = j.at("f1_weight").get<double>();
    f.runtime_weight = j.value("runtime_weight", 0.0);
    f.max_runtime_s = j.value("max_runtime_s", 0.0);
    f.compute_weight = j.value("compute_weight", 0.0);
    f.max_gflops = j.value("max_gflops", 0.0);
    f.clamp_terms = j.value("clamp_terms", true);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("score formula: ") + e.what());
  }
  f.validate();
  return f;
}

ScoreFormula load_score_formula(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open score formula '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("score formula '" + path + "': " + e.what());
  }
  return score_formula_from_json(j);
}

double submission_score(double avg_f1, double runtime_s, double gflops, const ScoreFormula& formula) {
  formula.validate();
  auto term = [&](double weight, double max, double measured) {
    if (weight == 0.0) return 0.0;
    const double v = (max - measured) / max;
    return weight * (formula.clamp_terms ? clamp01(v) : v);
  };
  return formula.f1_weight * avg_f1 + term(formula.runtime_weight, formula.max_runtime_s, runtime_s) +
         term(formula.compute_weight, formula.max_gflops, gflops);
}

nlohmann::json to_json(const EvalReport& report, const EvalReport* baseline) {
  const Averages avg = averages(report);
  std::vector<double> deltas;
  if (baseline) deltas = delta(report, *baseline);
  std::size_t k = 0;
  nlohmann::json langs = nlohmann::json::array();
  for (std::size_t l = 0; l < report.languages.size(); ++l) {
    const auto& lang = report.languages[l];
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& c : lang.classes) {
      nlohmann::json jc{{"name", c.name}, {"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}};
      if (c.counts) jc["counts"] = {{"tp", c.counts->tp}, {"fp", c.counts->fp}, {"fn", c.counts->fn}, {"tn", c.counts->tn}};
      if (baseline) jc["delta_f1"] = deltas[k];
      ++k;
      classes.push_back(std::move(jc));
    }
    const auto& m = avg.per_language[l];
    langs.push_back({{"language", to_string(lang.language)},
                     {"classes", std::move(classes)},
                     {"average", {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}}}});
  }
  return {{"languages", std::move(langs)},
          {"grand_average",
           {{"precision", avg.grand.precision}, {"recall", avg.grand.recall}, {"f1", avg.grand.f1}}}};
}

EvalReport eval_report_from_json(const nlohmann::json& j) {
  EvalReport out;
  try {
    for (const auto& jl : j.at("languages")) {
      LanguageReport lang{parse_language(jl.at("language").get<std::string>()), {}};
      for (const auto& jc : jl.at("classes")) {
        ClassMetrics m;
        m.name = jc.at("name").get<std::string>();
        m.precision = jc.at("precision").get<double>();
        m.recall = jc.at("recall").get<double>();
        m.f1 = jc.at("f1").get<double>();
        if (jc.contains("counts")) {
          const auto& k = jc.at("counts");
          m.counts = ClassCounts{k.at("tp").get<std::size_t>(), k.at("fp").get<std::size_t>(),
                                 k.at("fn").get<std::size_t>(), k.at("tn").get<std::size_t>()};
        }
        lang.classes.push_back(std::move(m));
      }
      out.languages.push_back(std::move(lang));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("evaluation report: ") + e.what());
  }
  return out;
}

void write_report_csv(std::ostream& out, const EvalReport& report, const EvalReport* baseline) {
  const Averages avg = averages(report);
  std::vector<double> deltas;
  if (baseline) deltas = delta(report, *baseline);
  std::vector<double> base_lang_f1;
  double base_grand = 0.0;
  if (baseline) {
    const Averages b = averages(*baseline);
    for (const auto& m : b.per_language) base_lang_f1.push_back(m.f1);
    base_grand = b.grand.f1;
  }
  csv::write_record(out, {"language", "class", "P", "R", "F1", "dF1"});
  std::size_t k = 0;
  for (std::size_t l = 0; l < report.languages.size(); ++l) {
    const auto& lang = report.languages[l];
    const std::string lname(to_string(lang.language));
    for (const auto& c : lang.classes) {
      csv::write_record(out, {lname, c.name, format_fixed(c.precision), format_fixed(c.recall), format_fixed(c.f1),
                              baseline ? format_fixed(deltas[k]) : ""});
      ++k;
    }
    const auto& m = avg.per_language[l];
    csv::write_record(out, {lname, "Average", format_fixed(m.precision), format_fixed(m.recall), format_fixed(m.f1),
                            baseline ? format_fixed(m.f1 - base_lang_f1[l]) : ""});
  }
  csv::write_record(out, {"all", "Grand Average", format_fixed(avg.grand.precision), format_fixed(avg.grand.recall),
                          format_fixed(avg.grand.f1), baseline ? format_fixed(avg.grand.f1 - base_grand) : ""});
}

EvalReport read_baseline_csv(std::istream& in) {
  const auto records = csv::read_all(in);
  if (records.empty()) throw InputError("baseline csv is empty");
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < records[0].size(); ++i) col[key(records[0][i])] = i;
  for (const char* need : {"language", "class", "p", "r", "f1"}) {
    if (!col.count(need)) throw InputError(std::string("baseline csv lacks column '") + need + "'");
  }
  EvalReport out;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != records[0].size()) throw DatasetError(r - 1, "baseline row has the wrong number of fields");
    const Language lang = parse_language(rec[col["language"]]);
    if (out.languages.empty() || out.languages.back().language != lang) out.languages.push_back({lang, {}});
    ClassMetrics m;
    m.name = rec[col["class"]];
    try {
      m.precision = std::stod(rec[col["p"]]);
      m.recall = std::stod(rec[col["r"]]);
      m.f1 = std::stod(rec[col["f1"]]);
    } catch (const std::exception&) {
      throw DatasetError(r - 1, "baseline values must be numeric");
    }
    out.languages.back().classes.push_back(std::move(m));
  }
  return out;
}

}  // namespace ccl
