#include "ccl/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "ccl/csv.hpp"

namespace ccl {

namespace {

std::string normalize_name(std::string_view name) {
  std::string out;
  for (unsigned char c : name) {
    if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

// "10010", "[1,0,0,1,0]" or "1 0 0 1 0".
LabelVector parse_label_string(std::size_t row, std::string_view text) {
  LabelVector labels;
  for (char c : text) {
    if (c == '0' || c == '1') {
      labels.push_back(static_cast<std::uint8_t>(c - '0'));
    } else if (c != '[' && c != ']' && c != ',' && c != ' ' && c != '\t') {
      throw DatasetError(row, std::string("invalid character '") + c + "' in labels");
    }
  }
  return labels;
}

std::uint8_t parse_bool_cell(std::size_t row, const std::string& cell, const std::string& column) {
  const std::string v = trim(cell);
  if (v == "0") return 0;
  if (v == "1") return 1;
  throw DatasetError(row, "label column '" + column + "' must be 0 or 1, got '" + cell + "'");
}

void validate_row(std::size_t row, const LabeledComment& c) {
  const std::size_t width = catalog(c.language).size();
  if (c.labels.size() != width) {
    throw DatasetError(row, "label vector has width " + std::to_string(c.labels.size()) + ", expected " +
                                std::to_string(width));
  }
  if (c.combo.empty()) throw DatasetError(row, "empty comment text");
  if (std::none_of(c.labels.begin(), c.labels.end(), [](std::uint8_t b) { return b != 0; })) {
    throw DatasetError(row, "no label set");
  }
}

Split parse_split_at(std::size_t row, std::string_view tag) {
  try {
    return parse_split(tag);
  } catch (const InputError&) {
    throw DatasetError(row, "unknown split tag '" + std::string(tag) + "'");
  }
}

std::vector<LabeledComment> read_csv(std::istream& in, Language language) {
  const auto records = csv::read_all(in);
  if (records.empty()) return {};
  const auto& header = records.front();
  const ClassCatalog& cat = catalog(language);

  std::optional<std::size_t> id_col, combo_col, split_col, labels_col;
  std::vector<std::optional<std::size_t>> class_cols(cat.size());
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string key = normalize_name(header[i]);
    if (key == "id") id_col = i;
    else if (key == "combo") combo_col = i;
    else if (key == "split") split_col = i;
    else if (key == "labels") labels_col = i;
    for (std::size_t c = 0; c < cat.size(); ++c) {
      if (key == normalize_name(cat.class_names[c])) class_cols[c] = i;
    }
  }
  if (!combo_col) throw InputError("csv header has no 'combo' column");
  if (!split_col) throw InputError("csv header has no 'split' column");
  const bool per_class = std::all_of(class_cols.begin(), class_cols.end(), [](auto& c) { return c.has_value(); });
  if (!per_class && !labels_col) {
    throw InputError("csv header needs a 'labels' column or one column per " + std::string(to_string(language)) +
                     " class");
  }

  std::vector<LabeledComment> rows;
  rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const std::size_t row = r - 1;
    const auto& rec = records[r];
    if (rec.size() != header.size()) {
      throw DatasetError(row, "has " + std::to_string(rec.size()) + " fields, header has " +
                                  std::to_string(header.size()));
    }
    LabeledComment c;
    c.language = language;
    c.id = id_col ? rec[*id_col] : std::to_string(row);
    c.combo = rec[*combo_col];
    c.split = parse_split_at(row, trim(rec[*split_col]));
    if (per_class) {
      c.labels.reserve(cat.size());
      for (std::size_t k = 0; k < cat.size(); ++k) {
        c.labels.push_back(parse_bool_cell(row, rec[*class_cols[k]], header[*class_cols[k]]));
      }
    } else {
      c.labels = parse_label_string(row, rec[*labels_col]);
    }
    validate_row(row, c);
    rows.push_back(std::move(c));
  }
  return rows;
}

std::vector<LabeledComment> read_jsonl(std::istream& in, Language language) {
  std::vector<LabeledComment> rows;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DatasetError(row, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw DatasetError(row, "expected a JSON object");
    LabeledComment c;
    c.language = language;
    try {
      if (obj.contains("id")) {
        const auto& id = obj.at("id");
        c.id = id.is_string() ? id.get<std::string>() : id.dump();
      } else {
        c.id = std::to_string(row);
      }
      c.combo = obj.at("combo").get<std::string>();
      c.split = parse_split_at(row, obj.at("split").get<std::string>());
      for (const auto& v : obj.at("labels")) {
        const int bit = v.get<int>();
        if (bit != 0 && bit != 1) throw DatasetError(row, "labels entries must be 0 or 1");
        c.labels.push_back(static_cast<std::uint8_t>(bit));
      }
    } catch (const nlohmann::json::exception& e) {
      throw DatasetError(row, std::string("bad field: ") + e.what());
    }
    validate_row(row, c);
    rows.push_back(std::move(c));
    ++row;
  }
  return rows;
}

}  // namespace

DatasetError::DatasetError(std::size_t row, const std::string& what)
    : InputError("row " + std::to_string(row) + ": " + what), row_(row) {}

const ClassCatalog& catalog(Language language) {
  static const ClassCatalog java{Language::Java,
                                 {"Summary", "Ownership", "Expand", "Usage", "Pointer", "Deprecation", "Rational"}};
  static const ClassCatalog python{Language::Python,
                                   {"Usage", "Parameters", "DevelopmentNotes", "Expand", "Summary"}};
  static const ClassCatalog pharo{Language::Pharo,
                                  {"KeyImplementations", "Example", "Responsibility", "ClassReference", "Intent",
                                   "KeyMessage", "Collaborators"}};
  switch (language) {
    case Language::Java: return java;
    case Language::Python: return python;
    case Language::Pharo: return pharo;
  }
  throw InputError("unknown language");
}

std::string_view to_string(Language language) noexcept {
  switch (language) {
    case Language::Java: return "java";
    case Language::Python: return "python";
    case Language::Pharo: return "pharo";
  }
  return "?";
}

std::string_view to_string(Split split) noexcept { return split == Split::Train ? "train" : "test"; }

Language parse_language(std::string_view name) {
  const std::string n = lower(name);
  if (n == "java") return Language::Java;
  if (n == "python") return Language::Python;
  if (n == "pharo") return Language::Pharo;
  throw InputError("unknown language '" + std::string(name) + "' (expected java, python or pharo)");
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "test") return Split::Test;
  throw InputError("unknown split '" + std::string(name) + "' (expected train or test)");
}

DatasetFormat detect_format(const std::filesystem::path& path) {
  const std::string ext = lower(path.extension().string());
  if (ext == ".jsonl" || ext == ".ndjson" || ext == ".json") return DatasetFormat::JsonLines;
  return DatasetFormat::Csv;
}

std::vector<LabeledComment> read_dataset(std::istream& in, DatasetFormat format, Language language) {
  return format == DatasetFormat::Csv ? read_csv(in, language) : read_jsonl(in, language);
}

std::vector<LabeledComment> load_dataset(const std::filesystem::path& path, Language language) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open dataset '" + path.string() + "'");
  return read_dataset(in, detect_format(path), language);
}

void write_dataset(std::ostream& out, std::span<const LabeledComment> rows, DatasetFormat format) {
  if (format == DatasetFormat::JsonLines) {
    for (const auto& r : rows) {
      nlohmann::json obj{{"id", r.id}, {"combo", r.combo}, {"split", to_string(r.split)}, {"labels", r.labels}};
      out << obj.dump() << '\n';
    }
    return;
  }
  if (rows.empty()) return;
  const ClassCatalog& cat = catalog(rows.front().language);
  csv::Record header{"id", "combo", "split"};
  header.insert(header.end(), cat.class_names.begin(), cat.class_names.end());
  csv::write_record(out, header);
  for (const auto& r : rows) {
    csv::Record rec{r.id, r.combo, std::string(to_string(r.split))};
    for (std::uint8_t b : r.labels) rec.push_back(b ? "1" : "0");
    csv::write_record(out, rec);
  }
}

std::vector<LabeledComment> filter_split(std::span<const LabeledComment> rows, Split split) {
  std::vector<LabeledComment> out;
  for (const auto& r : rows) {
    if (r.split == split) out.push_back(r);
  }
  return out;
}

ClassStats compute_class_stats(std::span<const LabeledComment> rows) {
  if (rows.empty()) throw InputError("class statistics need at least one row: frequencies undefined");
  ClassStats stats;
  stats.language = rows.front().language;
  const std::size_t width = catalog(stats.language).size();
  stats.total = rows.size();
  stats.positives.assign(width, 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.language != stats.language) throw InputError("class statistics over mixed languages");
    if (r.labels.size() != width) throw DatasetError(i, "label vector width does not match catalog");
    for (std::size_t c = 0; c < width; ++c) stats.positives[c] += r.labels[c] ? 1 : 0;
  }
  stats.negatives.resize(width);
  stats.frequency.resize(width);
  for (std::size_t c = 0; c < width; ++c) {
    stats.negatives[c] = stats.total - stats.positives[c];
    stats.frequency[c] = static_cast<double>(stats.positives[c]) / static_cast<double>(stats.total);
  }
  return stats;
}

}  // namespace ccl
