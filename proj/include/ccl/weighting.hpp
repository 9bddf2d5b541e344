#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "ccl/corpus.hpp"

namespace ccl {

enum class Strategy { EW, ICF, RBF, FAMO };

std::string_view to_string(Strategy strategy) noexcept;
// Case-insensitive: ew, icf, rbf, famo.
Strategy parse_strategy(std::string_view name);

// Per-class multipliers applied to the per-class BCE terms.
struct LossWeights {
  Strategy strategy = Strategy::EW;
  std::vector<double> w;

  std::size_t size() const noexcept { return w.size(); }
};

// All ones. Throws InputError for classes == 0.
LossWeights ew_weights(std::size_t classes);

// w_c = 1 / f_c. Throws InputError if any class has no positives.
LossWeights icf_weights(const ClassStats& stats);

// Ranks classes by frequency (descending, ties in catalog order) and gives the
// class at rank k the frequency of the class at rank C-1-k, so the rarest class
// receives the frequency of the most common one. A class with no positives
// hands a zero weight to the most common class.
LossWeights rbf_weights(const ClassStats& stats);

// Weights for a static strategy. FAMO returns its uniform starting point (all ones).
LossWeights static_weights(Strategy strategy, const ClassStats& stats);

}  // namespace ccl
