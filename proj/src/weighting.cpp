#include "ccl/weighting.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <string>

namespace ccl {

std::string_view to_string(Strategy strategy) noexcept {
  switch (strategy) {
    case Strategy::EW: return "EW";
    case Strategy::ICF: return "ICF";
    case Strategy::RBF: return "RBF";
    case Strategy::FAMO: return "FAMO";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  std::string n(name);
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (n == "ew") return Strategy::EW;
  if (n == "icf") return Strategy::ICF;
  if (n == "rbf") return Strategy::RBF;
  if (n == "famo") return Strategy::FAMO;
  throw InputError("unknown strategy '" + std::string(name) + "' (expected ew, icf, rbf or famo)");
}

LossWeights ew_weights(std::size_t classes) {
  if (classes == 0) throw InputError("equal weights need at least one class");
  return {Strategy::EW, std::vector<double>(classes, 1.0)};
}

LossWeights icf_weights(const ClassStats& stats) {
  if (stats.classes() == 0) throw InputError("inverse class frequency weights need at least one class");
  LossWeights out{Strategy::ICF, {}};
  out.w.reserve(stats.classes());
  const auto& names = catalog(stats.language).class_names;
  for (std::size_t c = 0; c < stats.classes(); ++c) {
    if (stats.frequency[c] <= 0.0) {
      throw InputError("class '" + (c < names.size() ? names[c] : std::to_string(c)) +
                       "' has no positive rows; inverse frequency is undefined");
    }
    out.w.push_back(1.0 / stats.frequency[c]);
  }
  return out;
}

LossWeights rbf_weights(const ClassStats& stats) {
  const std::size_t n = stats.classes();
  if (n == 0) throw InputError("ranking-based weights need at least one class");
  std::vector<std::size_t> rank(n);
  std::iota(rank.begin(), rank.end(), std::size_t{0});
  std::stable_sort(rank.begin(), rank.end(),
                   [&](std::size_t a, std::size_t b) { return stats.frequency[a] > stats.frequency[b]; });
  LossWeights out{Strategy::RBF, std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) out.w[rank[k]] = stats.frequency[rank[n - 1 - k]];
  return out;
}

LossWeights static_weights(Strategy strategy, const ClassStats& stats) {
  switch (strategy) {
    case Strategy::EW: return ew_weights(stats.classes());
    case Strategy::ICF: return icf_weights(stats);
    case Strategy::RBF: return rbf_weights(stats);
    case Strategy::FAMO: return {Strategy::FAMO, std::vector<double>(stats.classes(), 1.0)};
  }
  throw InputError("unknown strategy");
}

}  // namespace ccl
