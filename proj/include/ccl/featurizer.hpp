#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ccl {

// Sorted by index, no duplicate indices, no explicit zeros.
struct SparseVector {
  struct Entry {
    std::uint32_t index;
    double value;
    bool operator==(const Entry&) const = default;
  };

  std::uint32_t dims = 0;
  std::vector<Entry> entries;

  bool empty() const noexcept { return entries.empty(); }
  double norm() const noexcept;
  bool operator==(const SparseVector&) const = default;
};

struct FeaturizerConfig {
  std::uint32_t dims = 1u << 18;  // power of two
  int ngram_max = 1;              // 1 or 2
  bool lowercase = true;
  bool l2_normalize = true;
  std::uint64_t seed = 0;

  // Throws InputError when dims is not a power of two >= 2 or ngram_max is not 1 or 2.
  void validate() const;
  bool operator==(const FeaturizerConfig&) const = default;
};

void to_json(nlohmann::json& j, const FeaturizerConfig& c);
void from_json(const nlohmann::json& j, FeaturizerConfig& c);

// Splits on every non-alphanumeric byte. Bytes >= 0x80 count as alphanumeric so
// UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view text, const FeaturizerConfig& config);

// Signed feature hashing of unigrams (and bigrams when ngram_max == 2).
// Each n-gram contributes sign(h) at index h mod dims, h = hash64(ngram, seed);
// the sign is the top bit of h. Bigrams are hashed as "left right".
SparseVector featurize(std::string_view text, const FeaturizerConfig& config);

}  // namespace ccl
