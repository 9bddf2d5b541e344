#include <cmath>

#include <doctest.h>

#include "ccl/featurizer.hpp"
#include "ccl/hash.hpp"
#include "support/synthetic.hpp"

using namespace ccl;

TEST_CASE("hash is stable") {
  // Frozen values (computed out of band) guard the feature space across builds.
  CHECK(hash64("", 0) == 0x5b21f68ffa77f14cULL);
  CHECK(hash64("return", 0) == 0xb9f0db844fef7b7fULL);
  CHECK(hash64("return", 1) == 0x4043dadd3b98362bULL);
  CHECK(hash64("the index", 0) == 0x424589cd92f544f6ULL);
}

TEST_CASE("tokenize") {
  FeaturizerConfig cfg;
  CHECK(tokenize("@return the index", cfg) == std::vector<std::string>{"return", "the", "index"});
  CHECK(tokenize("", cfg).empty());
  CHECK(tokenize("TODO: fix NPE", cfg) == std::vector<std::string>{"todo", "fix", "npe"});
  cfg.lowercase = false;
  CHECK(tokenize("TODO: fix", cfg) == std::vector<std::string>{"TODO", "fix"});
  CHECK(tokenize("  ,, ;; ", cfg).empty());
}

TEST_CASE("config validation") {
  FeaturizerConfig cfg;
  cfg.dims = 1000;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg.dims = 1;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg.dims = 2;
  cfg.ngram_max = 3;
  CHECK_THROWS_AS(cfg.validate(), InputError);
}

TEST_CASE("featurize") {
  FeaturizerConfig cfg;
  SUBCASE("deterministic") { CHECK(featurize("Returns the list", cfg) == featurize("Returns the list", cfg)); }
  SUBCASE("bigrams add one feature per adjacent pair") {
    cfg.ngram_max = 2;
    cfg.l2_normalize = false;
    const auto v = featurize("a b", cfg);
    CHECK(v.entries.size() == 3);
    for (const auto& e : v.entries) CHECK(std::abs(e.value) == 1.0);
  }
  SUBCASE("unit norm") {
    const auto v = featurize("Deprecated: use bar() instead of foo()", cfg);
    CHECK(std::abs(v.norm() - 1.0) < 1e-9);
  }
  SUBCASE("empty text gives empty vector") { CHECK(featurize("", cfg).empty()); }
  SUBCASE("repeated token accumulates") {
    cfg.l2_normalize = false;
    const auto v = featurize("x x x", cfg);
    REQUIRE(v.entries.size() == 1);
    CHECK(std::abs(v.entries[0].value) == 3.0);
  }
}

TEST_CASE("property: bounded, sorted, zero-free, unit norm over random strings") {
  testing::Rng rng(2024);
  FeaturizerConfig cfg;
  cfg.dims = 64;  // small to force collisions, including cancelling ones
  cfg.ngram_max = 2;
  const std::string alphabet = "abcde XYZ_-.,;()01";
  for (int i = 0; i < 10000; ++i) {
    std::string s;
    const std::size_t len = rng.below(40);
    for (std::size_t k = 0; k < len; ++k) s.push_back(alphabet[rng.below(alphabet.size())]);
    const auto v = featurize(s, cfg);
    REQUIRE(v.dims == cfg.dims);
    for (std::size_t k = 0; k < v.entries.size(); ++k) {
      REQUIRE(v.entries[k].index < cfg.dims);
      REQUIRE(v.entries[k].value != 0.0);
      if (k) REQUIRE(v.entries[k - 1].index < v.entries[k].index);
    }
    if (!v.empty()) REQUIRE(std::abs(v.norm() - 1.0) < 1e-9);
  }
}
