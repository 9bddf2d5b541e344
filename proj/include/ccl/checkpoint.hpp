#pragma once

#include <filesystem>
#include <iosfwd>

#include <json.hpp>

#include "ccl/corpus.hpp"
#include "ccl/featurizer.hpp"
#include "ccl/model.hpp"
#include "ccl/trainer.hpp"

namespace ccl {

// Binary model container, little-endian:
//
//   bytes 0..7   magic "CCLMODEL"
//   u32          format version (1)
//   u32          header length H
//   H bytes      UTF-8 JSON header: classes, dims, language, class_names,
//                featurizer, train_config, strategy, initial_weights, manifest
//   u64          number of stored feature rows R
//   R times      u32 feature index, then `classes` f64 weights
//   classes f64  bias
//
// Only feature rows with a nonzero weight are stored, in ascending index order.
struct Checkpoint {
  ModelParams params;
  Language language = Language::Java;
  FeaturizerConfig featurizer;
  TrainConfig train_config;
  LossWeights initial_weights;
  nlohmann::json manifest = nlohmann::json::object();
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ccl
