#include "ccl/featurizer.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>

#include "ccl/error.hpp"
#include "ccl/hash.hpp"

namespace ccl {

namespace {

bool is_token_byte(unsigned char c) { return c >= 0x80 || std::isalnum(c); }

void add_feature(std::vector<SparseVector::Entry>& out, std::string_view ngram, const FeaturizerConfig& config) {
  const std::uint64_t h = hash64(ngram, config.seed);
  const auto index = static_cast<std::uint32_t>(h & (config.dims - 1));
  const double sign = (h >> 63) ? -1.0 : 1.0;
  out.push_back({index, sign});
}

}  // namespace

double SparseVector::norm() const noexcept {
  double sq = 0.0;
  for (const auto& e : entries) sq += e.value * e.value;
  return std::sqrt(sq);
}

void FeaturizerConfig::validate() const {
  if (dims < 2 || !std::has_single_bit(dims)) {
    throw InputError("featurizer dims must be a power of two >= 2, got " + std::to_string(dims));
  }
  if (ngram_max != 1 && ngram_max != 2) {
    throw InputError("featurizer ngram_max must be 1 or 2, got " + std::to_string(ngram_max));
  }
}

void to_json(nlohmann::json& j, const FeaturizerConfig& c) {
  j = nlohmann::json{{"dims", c.dims},
                     {"ngram_max", c.ngram_max},
                     {"lowercase", c.lowercase},
                     {"l2_normalize", c.l2_normalize},
                     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, FeaturizerConfig& c) {
  j.at("dims").get_to(c.dims);
  j.at("ngram_max").get_to(c.ngram_max);
  j.at("lowercase").get_to(c.lowercase);
  j.at("l2_normalize").get_to(c.l2_normalize);
  j.at("seed").get_to(c.seed);
}

std::vector<std::string> tokenize(std::string_view text, const FeaturizerConfig& config) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (is_token_byte(c)) {
      current.push_back(config.lowercase && c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

SparseVector featurize(std::string_view text, const FeaturizerConfig& config) {
  config.validate();
  const auto tokens = tokenize(text, config);

  std::vector<SparseVector::Entry> raw;
  raw.reserve(tokens.size() * static_cast<std::size_t>(config.ngram_max));
  for (const auto& t : tokens) add_feature(raw, t, config);
  if (config.ngram_max == 2) {
    std::string bigram;
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
      bigram.assign(tokens[i]).append(" ").append(tokens[i + 1]);
      add_feature(raw, bigram, config);
    }
  }

  std::stable_sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
  SparseVector out;
  out.dims = config.dims;
  for (const auto& e : raw) {
    if (!out.entries.empty() && out.entries.back().index == e.index) {
      out.entries.back().value += e.value;
    } else {
      out.entries.push_back(e);
    }
  }
  std::erase_if(out.entries, [](const auto& e) { return e.value == 0.0; });

  if (config.l2_normalize && !out.entries.empty()) {
    const double n = out.norm();
    for (auto& e : out.entries) e.value /= n;
  }
  return out;
}

}  // namespace ccl
