#include <cmath>

#include <doctest.h>

#include "ccl/trainer.hpp"
#include "support/synthetic.hpp"

using namespace ccl;

namespace {

// C = 2, D = 16: class 0 iff token "pos" present, class 1 otherwise.
std::vector<Example> separable_set(std::uint64_t seed, std::size_t n) {
  testing::Rng rng(seed);
  FeaturizerConfig f;
  f.dims = 16;
  std::vector<Example> out;
  for (std::size_t i = 0; i < n; ++i) {
    const bool pos = rng.bernoulli(0.5);
    const std::string text = pos ? "pos alpha" : "neg beta";
    out.push_back({featurize(text, f), LabelVector{static_cast<std::uint8_t>(pos), static_cast<std::uint8_t>(!pos)}});
  }
  return out;
}

double exact_match(const ModelParams& p, const std::vector<Example>& data) {
  std::size_t hits = 0;
  for (const auto& e : data) hits += predict(forward(p, e.x)) == e.y;
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace

TEST_CASE("training is deterministic") {
  const auto data = separable_set(7, 200);
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.epochs = 3;
  cfg.lr_scale = 1000;
  cfg.seed = 99;
  cfg.record_batches = true;
  const auto a = train_examples(data, testing::stats_of(data), cfg);
  const auto b = train_examples(data, testing::stats_of(data), cfg);
  CHECK(a.params == b.params);
  CHECK(a.history == b.history);
  cfg.seed = 100;
  const auto c = train_examples(data, testing::stats_of(data), cfg);
  CHECK_FALSE(a.history == c.history);
}

TEST_CASE("separable set: loss decreases every epoch and the fit is near perfect") {
  const auto data = separable_set(7, 200);
  TrainConfig cfg;
  cfg.batch_size = 8;
  cfg.epochs = 10;
  cfg.learning_rate = 5e-5;
  cfg.lr_scale = 1000;
  cfg.strategy = Strategy::EW;
  cfg.seed = 7;
  const auto r = train_examples(data, testing::stats_of(data), cfg);
  REQUIRE(r.history.epoch_loss.size() == 10);
  for (std::size_t e = 1; e < 10; ++e) CHECK(r.history.epoch_loss[e] < r.history.epoch_loss[e - 1]);
  CHECK(exact_match(r.params, data) >= 0.95);
}

TEST_CASE("zero epochs return zero parameters and no history") {
  const auto data = separable_set(1, 10);
  TrainConfig cfg;
  cfg.epochs = 0;
  const auto r = train_examples(data, testing::stats_of(data), cfg);
  CHECK(r.params == ModelParams(2, 16));
  CHECK(r.history.epoch_loss.empty());
}

TEST_CASE("configuration errors") {
  const auto data = separable_set(1, 10);
  TrainConfig cfg;
  cfg.strategy = Strategy::FAMO;
  CHECK_THROWS_AS(train_examples(data, testing::stats_of(data), cfg), InputError);
  cfg.famo_alpha = 0.025;
  cfg.famo_gamma = 0.001;
  CHECK_NOTHROW(train_examples(data, testing::stats_of(data), cfg));
  CHECK_THROWS_AS(train_examples(std::vector<Example>{}, testing::stats_of(data), cfg), InputError);
  cfg.batch_size = 0;
  CHECK_THROWS_AS(train_examples(data, testing::stats_of(data), cfg), InputError);
}

TEST_CASE("FAMO weights move during training and stay on the scaled simplex") {
  const auto data = separable_set(3, 120);
  TrainConfig cfg;
  cfg.strategy = Strategy::FAMO;
  cfg.famo_alpha = 0.25;
  cfg.famo_gamma = 0.01;
  cfg.lr_scale = 1000;
  cfg.epochs = 2;
  cfg.record_batches = true;
  const auto r = train_examples(data, testing::stats_of(data), cfg);
  REQUIRE(r.history.batches.size() > 2);
  CHECK(r.history.batches[0].weights == std::vector<double>{1.0, 1.0});
  bool moved = false;
  for (const auto& b : r.history.batches) {
    CHECK(b.weights[0] + b.weights[1] == doctest::Approx(2.0).epsilon(1e-12));
    moved = moved || b.weights[0] != 1.0;
  }
  CHECK(moved);
}

TEST_CASE("ICF at equal frequencies is EW with a doubled step") {
  const auto data = separable_set(11, 100);
  ClassStats balanced = testing::stats_of(data);
  balanced.frequency = {0.5, 0.5};
  TrainConfig cfg;
  cfg.lr_scale = 1000;
  cfg.epochs = 2;
  const auto ew = train_examples(data, balanced, cfg);
  cfg.strategy = Strategy::ICF;
  cfg.learning_rate /= 2;
  const auto icf = train_examples(data, balanced, cfg);
  CHECK(icf.initial_weights.w == std::vector<double>{2.0, 2.0});
  for (std::size_t c = 0; c < 2; ++c) {
    CHECK(icf.params.bias(c) == doctest::Approx(ew.params.bias(c)).epsilon(1e-12));
    for (std::size_t j = 0; j < 16; ++j)
      CHECK(icf.params.weight(c, j) == doctest::Approx(ew.params.weight(c, j)).epsilon(1e-12));
  }
}

TEST_CASE("weight decay with a vanishing gradient shrinks geometrically") {
  // Saturated predictions that agree with the labels: the data gradient is ~0.
  FeaturizerConfig f;
  f.dims = 16;
  std::vector<Example> data{{featurize("a", f), {1, 0}}, {featurize("b", f), {1, 0}}};
  ModelParams p(2, 16);
  p.bias(0) = 60;
  p.bias(1) = -60;
  p.set_weight(0, 3, 4.0);
  const auto g = gradient(p, data, ew_weights(2));
  for (int k = 1; k <= 10; ++k) {
    apply_update(p, g, 0.1, 0.2);
    CHECK(p.weight(0, 3) == doctest::Approx(4.0 * std::pow(1 - 0.1 * 0.2, k)).epsilon(1e-12));
  }
}

TEST_CASE("evaluate") {
  SUBCASE("zero params predict every class positive") {
    const auto rows = testing::count_faithful_rows(Language::Python, 200, {60, 61, 22, 35, 37}, 9);
    FeaturizerConfig f;
    f.dims = 1024;
    const auto test = filter_split(rows, Split::Test);
    const auto report = evaluate(ModelParams(5, 1024), test, f);
    const auto stats = compute_class_stats(test);
    REQUIRE(report.languages.size() == 1);
    for (std::size_t c = 0; c < 5; ++c) {
      const auto& m = report.languages[0].classes[c];
      CHECK(m.recall == (stats.positives[c] ? 100.0 : 0.0));
      CHECK(m.precision == doctest::Approx(100.0 * stats.frequency[c]));
    }
  }
  SUBCASE("oracle params give perfect F1") {
    // One distinct token per row; set weights so each row's labels are reproduced.
    FeaturizerConfig f;
    f.dims = 1u << 16;
    f.l2_normalize = false;
    std::vector<LabeledComment> rows;
    for (int i = 0; i < 12; ++i) {
      LabelVector y{0, 0, 0, 0, 0};
      y[i % 5] = 1;
      if (i % 3 == 0) y[(i + 2) % 5] = 1;
      rows.push_back({std::to_string(i), Language::Python, "tok" + std::to_string(i), y, Split::Test});
    }
    ModelParams p(5, f.dims);
    for (std::size_t c = 0; c < 5; ++c) p.bias(c) = -10;
    for (const auto& r : rows) {
      const auto x = featurize(r.combo, f);
      REQUIRE(x.entries.size() == 1);
      for (std::size_t c = 0; c < 5; ++c) {
        if (r.labels[c]) p.set_weight(c, x.entries[0].index, 20.0 * x.entries[0].value);
      }
    }
    const auto report = evaluate(p, rows, f);
    for (const auto& m : report.languages[0].classes) CHECK(m.f1 == doctest::Approx(100.0));
  }
}

TEST_CASE("shuffle is a permutation and seed dependent") {
  std::vector<std::size_t> a(50), b(50);
  for (std::size_t i = 0; i < 50; ++i) a[i] = b[i] = i;
  std::uint64_t s1 = 1, s2 = 2;
  shuffle_indices(a, s1);
  shuffle_indices(b, s2);
  CHECK(a != b);
  std::sort(a.begin(), a.end());
  for (std::size_t i = 0; i < 50; ++i) CHECK(a[i] == i);
}
