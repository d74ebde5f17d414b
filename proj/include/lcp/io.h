#ifndef LCP_IO_H_
#define LCP_IO_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "lcp/features.h"
#include "lcp/models.h"

namespace lcp {

using Json = nlohmann::ordered_json;

inline constexpr std::uint32_t kFeatureFormatVersion = 1;
inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

// Dense row-major table of doubles in the "LCPF" container:
// magic, u32 version, u64 rows, u64 cols, rows*cols little-endian f64.
struct DoubleTable {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

void write_double_table(const std::filesystem::path& path,
                        const DoubleTable& table);
// Throws StageError if the file is missing, FormatError on a bad magic,
// unsupported version or truncated payload.
DoubleTable read_double_table(const std::filesystem::path& path);

// "LCPM" checkpoint: magic, u32 version, architecture descriptor, then every
// parameter block as (name, rows, cols, f64 values).
void save_checkpoint(const std::filesystem::path& path, const Model& model);
// Rebuilds the architecture and restores every block. Throws FormatError on
// a version mismatch or blocks that disagree with the architecture.
std::unique_ptr<Model> load_checkpoint(const std::filesystem::path& path);

Json to_json(const NormalizationStats& stats);
NormalizationStats stats_from_json(const Json& j);
Json to_json(const ModelSpec& spec);

void write_json(const std::filesystem::path& path, const Json& j);
// Throws StageError naming the file when it does not exist.
Json read_json(const std::filesystem::path& path);

// Throws StageError naming the file when it does not exist.
void require_file(const std::filesystem::path& path);

// Commit the library was built from, or "unknown".
std::string_view build_commit();

// 16 lowercase hex digits.
std::string hex64(std::uint64_t value);

}  // namespace lcp

#endif  // LCP_IO_H_
