#include "lcp/io.h"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "lcp/errors.h"

namespace lcp {

static_assert(std::endian::native == std::endian::little,
              "binary containers assume a little-endian host");

namespace {

constexpr char kFeatureMagic[4] = {'L', 'C', 'P', 'F'};
constexpr char kCheckpointMagic[4] = {'L', 'C', 'P', 'M'};

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw StageError("cannot write " + path.string());
  }
  void bytes(const void* data, std::size_t size) {
    out_.write(static_cast<const char*>(data),
               static_cast<std::streamsize>(size));
  }
  template <typename T>
  void pod(T value) {
    bytes(&value, sizeof value);
  }
  void string(const std::string& s) {
    pod(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void close() {
    out_.close();
    if (!out_) throw StageError("failed writing " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path) {
    require_file(path);
    in_.open(path, std::ios::binary);
    if (!in_) throw StageError("cannot read " + path.string());
  }
  void bytes(void* data, std::size_t size) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
    if (static_cast<std::size_t>(in_.gcount()) != size) {
      throw FormatError(path_.string() + ": truncated file");
    }
  }
  template <typename T>
  T pod() {
    T value;
    bytes(&value, sizeof value);
    return value;
  }
  std::string string() {
    const auto size = pod<std::uint32_t>();
    if (size > (1u << 20)) throw FormatError(path_.string() + ": bad string");
    std::string s(size, '\0');
    bytes(s.data(), size);
    return s;
  }
  void magic(const char (&expected)[4]) {
    char got[4];
    bytes(got, 4);
    if (std::memcmp(got, expected, 4) != 0) {
      throw FormatError(path_.string() + ": not a " +
                        std::string(expected, 4) + " file");
    }
  }
  void version(std::uint32_t expected) {
    const auto v = pod<std::uint32_t>();
    if (v != expected) {
      throw FormatError(path_.string() + ": unsupported format version " +
                        std::to_string(v) + " (expected " +
                        std::to_string(expected) + ")");
    }
  }
  void expect_end() {
    if (in_.peek() != std::char_traits<char>::eof()) {
      throw FormatError(path_.string() + ": trailing bytes");
    }
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
};

}  // namespace

void write_double_table(const std::filesystem::path& path,
                        const DoubleTable& table) {
  if (table.data.size() != table.rows * table.cols) {
    throw ArgumentError("double table: data size disagrees with shape");
  }
  Writer w(path);
  w.bytes(kFeatureMagic, 4);
  w.pod(kFeatureFormatVersion);
  w.pod(static_cast<std::uint64_t>(table.rows));
  w.pod(static_cast<std::uint64_t>(table.cols));
  w.bytes(table.data.data(), table.data.size() * sizeof(double));
  w.close();
}

DoubleTable read_double_table(const std::filesystem::path& path) {
  Reader r(path);
  r.magic(kFeatureMagic);
  r.version(kFeatureFormatVersion);
  DoubleTable t;
  t.rows = r.pod<std::uint64_t>();
  t.cols = r.pod<std::uint64_t>();
  const auto size = std::filesystem::file_size(path);
  if (t.cols != 0 && t.rows > size / sizeof(double) / t.cols) {
    throw FormatError(path.string() + ": truncated file");
  }
  t.data.resize(t.rows * t.cols);
  r.bytes(t.data.data(), t.data.size() * sizeof(double));
  r.expect_end();
  return t;
}

void save_checkpoint(const std::filesystem::path& path, const Model& model) {
  const ModelSpec& spec = model.spec();
  Writer w(path);
  w.bytes(kCheckpointMagic, 4);
  w.pod(kCheckpointFormatVersion);
  w.pod(static_cast<std::int32_t>(spec.kind));
  w.pod(static_cast<std::int32_t>(spec.input_dim));
  w.pod(static_cast<std::int32_t>(spec.embed_dim));
  w.pod(static_cast<std::int32_t>(spec.hidden_dim));
  w.pod(static_cast<std::int32_t>(spec.n));
  w.pod(static_cast<std::int32_t>(spec.augmented ? 1 : 0));
  w.pod(static_cast<std::uint32_t>(spec.ffnn_hidden.size()));
  for (int width : spec.ffnn_hidden) w.pod(static_cast<std::int32_t>(width));
  w.pod(static_cast<std::uint32_t>(model.params().size()));
  for (const nn::ParamBlock& block : model.params()) {
    w.string(block.name);
    w.pod(static_cast<std::uint64_t>(block.value.rows()));
    w.pod(static_cast<std::uint64_t>(block.value.cols()));
    w.bytes(block.value.data(), block.value.size() * sizeof(double));
  }
  w.close();
}

std::unique_ptr<Model> load_checkpoint(const std::filesystem::path& path) {
  Reader r(path);
  r.magic(kCheckpointMagic);
  r.version(kCheckpointFormatVersion);
  ModelSpec spec;
  const auto kind = r.pod<std::int32_t>();
  if (kind < 0 || kind > static_cast<std::int32_t>(ModelKind::kLogReg)) {
    throw FormatError(path.string() + ": unknown model kind " +
                      std::to_string(kind));
  }
  spec.kind = static_cast<ModelKind>(kind);
  spec.input_dim = r.pod<std::int32_t>();
  spec.embed_dim = r.pod<std::int32_t>();
  spec.hidden_dim = r.pod<std::int32_t>();
  spec.n = r.pod<std::int32_t>();
  spec.augmented = r.pod<std::int32_t>() != 0;
  const auto layers = r.pod<std::uint32_t>();
  if (layers > 64) throw FormatError(path.string() + ": bad layer count");
  spec.ffnn_hidden.clear();
  for (std::uint32_t i = 0; i < layers; ++i) {
    spec.ffnn_hidden.push_back(r.pod<std::int32_t>());
  }
  std::unique_ptr<Model> model;
  try {
    model = build(spec, 0);
  } catch (const SpecError& e) {
    throw FormatError(path.string() + ": bad architecture: " + e.what());
  }
  const auto blocks = r.pod<std::uint32_t>();
  if (blocks != model->params().size()) {
    throw FormatError(path.string() + ": " + std::to_string(blocks) +
                      " parameter blocks, architecture has " +
                      std::to_string(model->params().size()));
  }
  for (nn::ParamBlock& block : model->params()) {
    const std::string name = r.string();
    const auto rows = r.pod<std::uint64_t>();
    const auto cols = r.pod<std::uint64_t>();
    if (name != block.name || rows != block.value.rows() ||
        cols != block.value.cols()) {
      throw FormatError(path.string() + ": block " + name +
                        " does not match the architecture");
    }
    r.bytes(block.value.data(), block.value.size() * sizeof(double));
  }
  r.expect_end();
  return model;
}

Json to_json(const NormalizationStats& stats) {
  Json j;
  j["mean"] = stats.mean;
  j["stddev"] = stats.stddev;
  j["exempt"] = stats.exempt;
  j["constant_dims"] = stats.constant_dims;
  j["hash"] = hex64(stats.hash());
  return j;
}

NormalizationStats stats_from_json(const Json& j) {
  NormalizationStats stats;
  try {
    stats.mean = j.at("mean").get<std::vector<double>>();
    stats.stddev = j.at("stddev").get<std::vector<double>>();
    stats.exempt = j.at("exempt").get<std::vector<bool>>();
    stats.constant_dims = j.at("constant_dims").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("normalization stats: ") + e.what());
  }
  if (stats.stddev.size() != stats.dim() || stats.exempt.size() != stats.dim()) {
    throw FormatError("normalization stats: inconsistent lengths");
  }
  if (j.contains("hash") && j.at("hash") != hex64(stats.hash())) {
    throw FormatError("normalization stats: hash mismatch");
  }
  return stats;
}

Json to_json(const ModelSpec& spec) {
  Json j;
  j["kind"] = std::string(to_string(spec.kind));
  j["input_dim"] = spec.input_dim;
  j["embed_dim"] = spec.embed_dim;
  j["hidden_dim"] = spec.hidden_dim;
  j["n"] = spec.n;
  j["augmented"] = spec.augmented;
  j["ffnn_hidden"] = spec.ffnn_hidden;
  j["parameters"] = spec.expected_parameter_count();
  return j;
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw StageError("cannot write " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw StageError("failed writing " + path.string());
}

Json read_json(const std::filesystem::path& path) {
  require_file(path);
  std::ifstream in(path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void require_file(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw StageError("missing input artifact: " + path.string());
  }
}

std::string_view build_commit() { return LCP_GIT_COMMIT; }

std::string hex64(std::uint64_t value) {
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx",
                static_cast<unsigned long long>(value));
  return buffer;
}

}  // namespace lcp
