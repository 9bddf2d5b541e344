#include "ccl/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "ccl/error.hpp"

namespace ccl {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'C', 'C', 'L', 'M', 'O', 'D', 'E', 'L'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw InputError("checkpoint is truncated");
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  ModelParams params = ckpt.params;
  params.fold_scale();
  const std::size_t C = params.classes();

  nlohmann::json header{{"classes", C},
                        {"dims", params.dims()},
                        {"language", to_string(ckpt.language)},
                        {"class_names", catalog(ckpt.language).class_names},
                        {"featurizer", ckpt.featurizer},
                        {"train_config", ckpt.train_config},
                        {"strategy", to_string(ckpt.train_config.strategy)},
                        {"initial_weights", ckpt.initial_weights.w},
                        {"manifest", ckpt.manifest}};
  const std::string text = header.dump();

  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));

  std::vector<std::uint32_t> rows;
  for (std::size_t j = 0; j < params.dims(); ++j) {
    const auto row = params.raw_row(j);
    if (std::any_of(row.begin(), row.end(), [](double v) { return v != 0.0; })) {
      rows.push_back(static_cast<std::uint32_t>(j));
    }
  }
  put<std::uint64_t>(out, rows.size());
  for (auto j : rows) {
    put<std::uint32_t>(out, j);
    for (double v : params.raw_row(j)) put<double>(out, v);
  }
  for (double b : params.biases()) put<double>(out, b);
  if (!out) throw InputError("failed writing checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw InputError("not a model checkpoint (bad magic)");
  }
  if (get<std::uint32_t>(in) != kVersion) throw InputError("unsupported checkpoint version");
  const auto header_len = get<std::uint32_t>(in);
  std::string text(header_len, '\0');
  if (!in.read(text.data(), header_len)) throw InputError("checkpoint is truncated");

  Checkpoint ckpt;
  std::size_t C = 0, D = 0;
  try {
    const auto header = nlohmann::json::parse(text);
    C = header.at("classes").get<std::size_t>();
    D = header.at("dims").get<std::size_t>();
    ckpt.language = parse_language(header.at("language").get<std::string>());
    ckpt.featurizer = header.at("featurizer").get<FeaturizerConfig>();
    ckpt.train_config = header.at("train_config").get<TrainConfig>();
    ckpt.initial_weights = {ckpt.train_config.strategy, header.at("initial_weights").get<std::vector<double>>()};
    ckpt.manifest = header.at("manifest");
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("checkpoint header: ") + e.what());
  }
  if (C != catalog(ckpt.language).size()) throw InputError("checkpoint class count does not match its language");
  if (D != ckpt.featurizer.dims) throw InputError("checkpoint dims do not match its featurizer");

  ckpt.params = ModelParams(C, D);
  const auto rows = get<std::uint64_t>(in);
  for (std::uint64_t r = 0; r < rows; ++r) {
    const auto j = get<std::uint32_t>(in);
    if (j >= D) throw InputError("checkpoint feature index out of range");
    auto row = ckpt.params.raw_row(j);
    for (std::size_t c = 0; c < C; ++c) row[c] = get<double>(in);
  }
  for (std::size_t c = 0; c < C; ++c) ckpt.params.bias(c) = get<double>(in);
  if (!ckpt.params.all_finite()) throw NumericalError("checkpoint contains non-finite parameters");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write checkpoint '" + path.string() + "'");
  write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint '" + path.string() + "'");
  return read_checkpoint(in);
}

}  // namespace ccl
