#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace dcpcc {

struct SchemaConfig {
  std::string label_column = "label";
  // Empty means every non-label column, in header order.
  std::vector<std::string> feature_columns;
  std::size_t min_frequency = 1;
};

// Per-column categorical vocabulary. Index order is first appearance among
// categories that meet min_frequency; the out-of-vocabulary slot is last.
struct ColumnVocab {
  std::string name;
  std::unordered_map<std::string, std::uint32_t> index;
  std::vector<std::string> categories;

  [[nodiscard]] std::uint32_t oov_index() const { return static_cast<std::uint32_t>(categories.size()); }
  // Number of embedding rows, including the OOV row.
  [[nodiscard]] std::size_t table_rows() const { return categories.size() + 1; }
  [[nodiscard]] std::uint32_t lookup(const std::string& category) const;
};

struct DatasetSchema {
  std::string label_column;
  std::vector<ColumnVocab> columns;
  std::size_t min_frequency = 1;

  [[nodiscard]] std::size_t n_fields() const { return columns.size(); }
  [[nodiscard]] std::vector<std::size_t> table_rows() const;

  void save(const std::filesystem::path& path) const;
  static DatasetSchema load(const std::filesystem::path& path);
};

struct EncodedSample {
  std::vector<std::uint32_t> indices;
  std::uint8_t label = 0;
};

// Raw CSV contents: header plus string cells, with source line numbers kept
// for diagnostics.
struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  [[nodiscard]] std::size_t column(const std::string& name) const;
};

RawTable read_csv(const std::filesystem::path& path);

// Row-major dataset. Categorical data fills `indices` (n x n_fields); dense
// real-vector data fills `dense` (n x dense_dim). Exactly one is in use.
struct Dataset {
  std::size_t n_fields = 0;
  std::vector<std::uint32_t> indices;
  std::size_t dense_dim = 0;
  std::vector<double> dense;
  std::vector<std::uint8_t> labels;

  [[nodiscard]] std::size_t size() const { return labels.size(); }
  [[nodiscard]] bool categorical() const { return n_fields > 0; }
  [[nodiscard]] std::size_t n_positives() const;
  [[nodiscard]] Dataset subset(std::span<const std::size_t> rows) const;
  [[nodiscard]] Dataset slice(std::size_t begin, std::size_t end) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Builds vocabularies from the given rows only (the training split).
DatasetSchema build_vocab(const RawTable& table, std::span<const std::size_t> rows, const SchemaConfig& config);
// Builds vocabularies from every row of a CSV file.
DatasetSchema build_vocab(const std::filesystem::path& csv_path, const SchemaConfig& config);

std::uint8_t parse_label(const std::string& value);
EncodedSample encode(std::span<const std::string> row, std::span<const std::size_t> feature_positions,
                     std::size_t label_position, const DatasetSchema& schema);
Dataset encode_rows(const RawTable& table, std::span<const std::size_t> rows, const DatasetSchema& schema);

struct SplitSpec {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
  std::uint64_t seed = 2024;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

// Seeded shuffle of 0..n-1 followed by contiguous slicing.
SplitIndices split_indices(std::size_t n, const SplitSpec& spec);

struct DatasetSplits {
  Dataset train;
  Dataset validation;
  Dataset test;
};

DatasetSplits split(const Dataset& data, const SplitSpec& spec);

struct SyntheticConfig {
  std::size_t n_samples = 50000;
  // 1 positive per 10 negatives.
  double positive_fraction = 1.0 / 11.0;
  std::size_t dim = 8;
  double positive_sigma = 0.5;
  std::size_t negative_components = 5;
  double shell_radius = 4.0;
  double negative_sigma = 1.0;
  std::uint64_t seed = 7;
};

// Positives from one isotropic Gaussian at the origin; negatives from a
// mixture whose centers lie on a sphere of radius shell_radius. Samples are
// shuffled. The positive count is round(n_samples * positive_fraction).
Dataset generate_synthetic(const SyntheticConfig& config);

// Dense CSV with header label,x0,...,x{d-1}.
void write_dense_csv(const std::filesystem::path& path, const Dataset& data);
Dataset read_dense_csv(const std::filesystem::path& path, const std::string& label_column = "label");

// Encoded-dataset cache: "PCCD", u16 version, u32 rows, u32 fields, then per
// row the field indices (u32) followed by the label (u8). Little-endian.
void write_cache(const std::filesystem::path& path, const Dataset& data);
Dataset read_cache(const std::filesystem::path& path);

// Deterministic training order for one epoch.
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch);

}  // namespace dcpcc
