#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ccl/error.hpp"

namespace ccl {

enum class Language { Java, Python, Pharo };
enum class Split { Train, Test };

// Per-language label set. Order is fixed and defines label-vector positions.
struct ClassCatalog {
  Language language;
  std::vector<std::string> class_names;

  std::size_t size() const noexcept { return class_names.size(); }
};

const ClassCatalog& catalog(Language language);

std::string_view to_string(Language language) noexcept;
std::string_view to_string(Split split) noexcept;
// Case-insensitive; throws InputError for anything other than java/python/pharo.
Language parse_language(std::string_view name);
Split parse_split(std::string_view name);

using LabelVector = std::vector<std::uint8_t>;

struct LabeledComment {
  std::string id;
  Language language = Language::Java;
  std::string combo;
  LabelVector labels;
  Split split = Split::Train;
};

// Positive/negative counts per class over one language's rows.
// frequency[c] = positives[c] / total.
struct ClassStats {
  Language language = Language::Java;
  std::size_t total = 0;
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;
  std::vector<double> frequency;

  std::size_t classes() const noexcept { return positives.size(); }
};

// Thrown for a malformed dataset row; `row()` is the 0-based data-row index
// (header excluded).
class DatasetError : public InputError {
 public:
  DatasetError(std::size_t row, const std::string& what);
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

enum class DatasetFormat { Csv, JsonLines };

// Chosen from the extension: .jsonl / .ndjson / .json -> JsonLines, else Csv.
DatasetFormat detect_format(const std::filesystem::path& path);

// CSV: header with id, combo, split, and either one 0/1 column per class
// (matched by name, ignoring case, spaces and underscores) or a single
// `labels` column holding a bit string ("10010") or a list ("[1,0,0,1,0]").
// JSONL: {"id": str, "combo": str, "split": "train"|"test", "labels": [0|1,...]}.
std::vector<LabeledComment> read_dataset(std::istream& in, DatasetFormat format, Language language);
std::vector<LabeledComment> load_dataset(const std::filesystem::path& path, Language language);

// CSV output uses per-class columns named after the catalog.
void write_dataset(std::ostream& out, std::span<const LabeledComment> rows, DatasetFormat format);

std::vector<LabeledComment> filter_split(std::span<const LabeledComment> rows, Split split);

// Throws InputError on an empty collection or mixed languages.
ClassStats compute_class_stats(std::span<const LabeledComment> rows);

}  // namespace ccl
