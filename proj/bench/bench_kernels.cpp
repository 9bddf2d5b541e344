// Serial reference vs OpenMP kernels on a synthetic Java-sized corpus.
#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "ccl/kernels.hpp"

using namespace ccl;

namespace {

std::vector<LabeledComment> corpus(std::size_t n) {
  std::mt19937_64 rng(1);
  std::vector<LabeledComment> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = rows[i];
    r.id = std::to_string(i);
    r.language = Language::Java;
    r.split = Split::Train;
    for (int w = 0; w < 40; ++w) r.combo += "tok" + std::to_string(rng() % 5000) + " ";
    r.labels.assign(7, 0);
    r.labels[rng() % 7] = 1;
  }
  return rows;
}

FeaturizerConfig bench_featurizer() {
  FeaturizerConfig f;
  f.dims = 1u << 16;
  f.ngram_max = 2;
  return f;
}

const std::vector<LabeledComment>& rows() {
  static const auto r = corpus(9339);
  return r;
}

const std::vector<Example>& examples() {
  static const auto e = featurize_rows(rows(), bench_featurizer(), Exec::Serial);
  return e;
}

const ModelParams& params() {
  static const ModelParams p = [] {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n;
    ModelParams m(7, bench_featurizer().dims);
    for (std::size_t j = 0; j < m.dims(); j += 3)
      for (std::size_t c = 0; c < 7; ++c) m.set_weight(c, j, n(rng));
    return m;
  }();
  return p;
}

Exec exec_of(const benchmark::State& s) { return s.range(0) ? Exec::Parallel : Exec::Serial; }

void BM_featurize(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(featurize_rows(rows(), bench_featurizer(), exec_of(s)));
  s.SetItemsProcessed(s.iterations() * static_cast<std::int64_t>(rows().size()));
}

void BM_tally(benchmark::State& s) {
  for (auto _ : s) benchmark::DoNotOptimize(tally_confusion(params(), examples(), 0.5, exec_of(s)));
  s.SetItemsProcessed(s.iterations() * static_cast<std::int64_t>(examples().size()));
}

void BM_loss(benchmark::State& s) {
  const auto w = ew_weights(7);
  for (auto _ : s) benchmark::DoNotOptimize(dataset_loss(params(), examples(), w, exec_of(s)));
  s.SetItemsProcessed(s.iterations() * static_cast<std::int64_t>(examples().size()));
}

}  // namespace

BENCHMARK(BM_featurize)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_tally)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_loss)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
