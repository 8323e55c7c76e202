#include "dcpcc/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "binary_io.hpp"
#include "dcpcc/errors.hpp"

namespace dcpcc {

namespace {

constexpr std::uint16_t kCacheVersion = 1;

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

struct ColumnLayout {
  std::size_t label = 0;
  std::vector<std::size_t> features;
  std::vector<std::string> names;
};

ColumnLayout resolve_layout(const RawTable& table, const SchemaConfig& config) {
  ColumnLayout layout;
  layout.label = table.column(config.label_column);
  if (config.feature_columns.empty()) {
    for (std::size_t i = 0; i < table.header.size(); ++i) {
      if (i == layout.label) continue;
      layout.features.push_back(i);
      layout.names.push_back(table.header[i]);
    }
  } else {
    for (const auto& name : config.feature_columns) {
      layout.features.push_back(table.column(name));
      layout.names.push_back(name);
    }
  }
  if (layout.features.empty()) throw DataError("no feature columns");
  return layout;
}

}  // namespace

std::uint32_t ColumnVocab::lookup(const std::string& category) const {
  auto it = index.find(category);
  return it == index.end() ? oov_index() : it->second;
}

std::vector<std::size_t> DatasetSchema::table_rows() const {
  std::vector<std::size_t> rows;
  for (const auto& c : columns) rows.push_back(c.table_rows());
  return rows;
}

void DatasetSchema::save(const std::filesystem::path& path) const {
  nlohmann::json j;
  j["label_column"] = label_column;
  j["min_frequency"] = min_frequency;
  for (const auto& c : columns) {
    j["columns"].push_back({{"name", c.name}, {"categories", c.categories}});
  }
  std::ofstream os(path);
  if (!os) throw DataError("cannot write schema " + path.string());
  os << j.dump(1) << '\n';
}

DatasetSchema DatasetSchema::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot read schema " + path.string());
  DatasetSchema schema;
  try {
    const auto j = nlohmann::json::parse(is);
    schema.label_column = j.at("label_column").get<std::string>();
    schema.min_frequency = j.at("min_frequency").get<std::size_t>();
    for (const auto& c : j.at("columns")) {
      ColumnVocab vocab;
      vocab.name = c.at("name").get<std::string>();
      vocab.categories = c.at("categories").get<std::vector<std::string>>();
      for (std::size_t i = 0; i < vocab.categories.size(); ++i) {
        vocab.index.emplace(vocab.categories[i], static_cast<std::uint32_t>(i));
      }
      schema.columns.push_back(std::move(vocab));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": malformed schema: " + e.what());
  }
  return schema;
}

std::size_t RawTable::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DataError("missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

RawTable read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path.string());
  RawTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(table.header.size()) + " fields, found " + std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
    table.line_numbers.push_back(line_no);
  }
  if (table.header.empty()) throw DataError(path.string() + ": empty file");
  return table;
}

std::size_t Dataset::n_positives() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.n_fields = n_fields;
  out.dense_dim = dense_dim;
  out.labels.reserve(rows.size());
  out.indices.reserve(rows.size() * n_fields);
  out.dense.reserve(rows.size() * dense_dim);
  for (std::size_t r : rows) {
    if (r >= size()) throw std::out_of_range("Dataset::subset: row out of range");
    out.labels.push_back(labels[r]);
    out.indices.insert(out.indices.end(), indices.begin() + static_cast<std::ptrdiff_t>(r * n_fields),
                       indices.begin() + static_cast<std::ptrdiff_t>((r + 1) * n_fields));
    out.dense.insert(out.dense.end(), dense.begin() + static_cast<std::ptrdiff_t>(r * dense_dim),
                     dense.begin() + static_cast<std::ptrdiff_t>((r + 1) * dense_dim));
  }
  return out;
}

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
  std::vector<std::size_t> rows(end - begin);
  std::iota(rows.begin(), rows.end(), begin);
  return subset(rows);
}

DatasetSchema build_vocab(const RawTable& table, std::span<const std::size_t> rows, const SchemaConfig& config) {
  if (rows.empty()) throw DataError("empty training split; cannot build vocabulary");
  const ColumnLayout layout = resolve_layout(table, config);
  DatasetSchema schema;
  schema.label_column = config.label_column;
  schema.min_frequency = config.min_frequency;
  for (std::size_t f = 0; f < layout.features.size(); ++f) {
    std::unordered_map<std::string, std::size_t> counts;
    std::vector<std::string> first_seen;
    for (std::size_t r : rows) {
      const std::string& v = table.rows[r][layout.features[f]];
      if (counts[v]++ == 0) first_seen.push_back(v);
    }
    ColumnVocab vocab;
    vocab.name = layout.names[f];
    for (const auto& v : first_seen) {
      if (counts[v] >= config.min_frequency) {
        vocab.index.emplace(v, static_cast<std::uint32_t>(vocab.categories.size()));
        vocab.categories.push_back(v);
      }
    }
    schema.columns.push_back(std::move(vocab));
  }
  return schema;
}

DatasetSchema build_vocab(const std::filesystem::path& csv_path, const SchemaConfig& config) {
  const RawTable table = read_csv(csv_path);
  std::vector<std::size_t> rows(table.rows.size());
  std::iota(rows.begin(), rows.end(), 0);
  return build_vocab(table, rows, config);
}

std::uint8_t parse_label(const std::string& value) {
  if (value == "1" || value == "1.0") return 1;
  if (value == "0" || value == "0.0") return 0;
  throw DataError("malformed label '" + value + "' (expected 0 or 1)");
}

EncodedSample encode(std::span<const std::string> row, std::span<const std::size_t> feature_positions,
                     std::size_t label_position, const DatasetSchema& schema) {
  if (feature_positions.size() != schema.n_fields()) {
    throw DataError("row layout does not match schema field count");
  }
  EncodedSample s;
  s.label = parse_label(row[label_position]);
  s.indices.reserve(feature_positions.size());
  for (std::size_t f = 0; f < feature_positions.size(); ++f) {
    s.indices.push_back(schema.columns[f].lookup(row[feature_positions[f]]));
  }
  return s;
}

Dataset encode_rows(const RawTable& table, std::span<const std::size_t> rows, const DatasetSchema& schema) {
  std::vector<std::size_t> positions;
  for (const auto& c : schema.columns) positions.push_back(table.column(c.name));
  const std::size_t label_pos = table.column(schema.label_column);
  Dataset out;
  out.n_fields = schema.n_fields();
  out.labels.reserve(rows.size());
  out.indices.reserve(rows.size() * out.n_fields);
  for (std::size_t r : rows) {
    EncodedSample s;
    try {
      s = encode(table.rows[r], positions, label_pos, schema);
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(table.line_numbers[r]) + ": " + e.what());
    }
    out.indices.insert(out.indices.end(), s.indices.begin(), s.indices.end());
    out.labels.push_back(s.label);
  }
  return out;
}

SplitIndices split_indices(std::size_t n, const SplitSpec& spec) {
  if (!(spec.train > 0 && spec.validation > 0 && spec.test > 0) ||
      std::abs(spec.train + spec.validation + spec.test - 1.0) > 1e-9) {
    throw ConfigError("split fractions must be positive and sum to 1");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(spec.seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * spec.train));
  const auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * spec.validation));
  if (n_train + n_val >= n || n_train == 0 || n_val == 0) {
    throw DataError("split of " + std::to_string(n) + " rows leaves an empty partition");
  }
  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                        order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  return out;
}

DatasetSplits split(const Dataset& data, const SplitSpec& spec) {
  const SplitIndices idx = split_indices(data.size(), spec);
  return {data.subset(idx.train), data.subset(idx.validation), data.subset(idx.test)};
}

Dataset generate_synthetic(const SyntheticConfig& config) {
  if (config.negative_components == 0) throw ConfigError("synthetic: need at least one negative component");
  if (!(config.positive_sigma > 0.0) || !(config.negative_sigma > 0.0)) {
    throw ConfigError("synthetic: sigmas must be positive");
  }
  if (!(config.positive_fraction > 0.0 && config.positive_fraction <= 0.5)) {
    throw ConfigError("synthetic: positive fraction must lie in (0, 0.5]");
  }
  if (config.dim < 2) throw ConfigError("synthetic: dim must be at least 2");
  if (config.n_samples < 2) throw ConfigError("synthetic: need at least two samples");

  const std::size_t d = config.dim;
  const auto n_pos =
      static_cast<std::size_t>(std::llround(static_cast<double>(config.n_samples) * config.positive_fraction));
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<std::vector<double>> centers(config.negative_components, std::vector<double>(d));
  for (auto& c : centers) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& v : c) {
        v = normal(rng);
        norm += v * v;
      }
    } while (norm < 1e-12);
    norm = std::sqrt(norm);
    for (double& v : c) v *= config.shell_radius / norm;
  }

  Dataset raw;
  raw.dense_dim = d;
  raw.dense.resize(config.n_samples * d);
  raw.labels.resize(config.n_samples);
  for (std::size_t i = 0; i < config.n_samples; ++i) {
    double* x = &raw.dense[i * d];
    if (i < n_pos) {
      raw.labels[i] = 1;
      for (std::size_t m = 0; m < d; ++m) x[m] = config.positive_sigma * normal(rng);
    } else {
      raw.labels[i] = 0;
      const auto& c = centers[(i - n_pos) % centers.size()];
      for (std::size_t m = 0; m < d; ++m) x[m] = c[m] + config.negative_sigma * normal(rng);
    }
  }
  std::vector<std::size_t> order(config.n_samples);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  return raw.subset(order);
}

void write_dense_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path.string());
  os << "label";
  for (std::size_t m = 0; m < data.dense_dim; ++m) os << ",x" << m;
  os << '\n';
  os.precision(17);
  for (std::size_t i = 0; i < data.size(); ++i) {
    os << static_cast<int>(data.labels[i]);
    for (std::size_t m = 0; m < data.dense_dim; ++m) os << ',' << data.dense[i * data.dense_dim + m];
    os << '\n';
  }
}

Dataset read_dense_csv(const std::filesystem::path& path, const std::string& label_column) {
  const RawTable table = read_csv(path);
  const std::size_t label_pos = table.column(label_column);
  Dataset out;
  out.dense_dim = table.header.size() - 1;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    try {
      out.labels.push_back(parse_label(row[label_pos]));
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c == label_pos) continue;
        std::size_t used = 0;
        const double v = std::stod(row[c], &used);
        if (used != row[c].size() || !std::isfinite(v)) throw DataError("bad number '" + row[c] + "'");
        out.dense.push_back(v);
      }
    } catch (const std::logic_error&) {
      throw DataError(path.string() + ":" + std::to_string(table.line_numbers[r]) + ": bad number");
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(table.line_numbers[r]) + ": " + e.what());
    }
  }
  return out;
}

void write_cache(const std::filesystem::path& path, const Dataset& data) {
  if (!data.categorical()) throw DataError("dataset cache holds categorical data only");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path.string());
  os.write("PCCD", 4);
  io::put<std::uint16_t>(os, kCacheVersion);
  io::put<std::uint32_t>(os, static_cast<std::uint32_t>(data.size()));
  io::put<std::uint32_t>(os, static_cast<std::uint32_t>(data.n_fields));
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t f = 0; f < data.n_fields; ++f) io::put<std::uint32_t>(os, data.indices[i * data.n_fields + f]);
    io::put<std::uint8_t>(os, data.labels[i]);
  }
}

Dataset read_cache(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path.string());
  io::expect_magic(is, "PCCD", path.string());
  const auto version = io::get<std::uint16_t>(is, "version");
  if (version != kCacheVersion) throw DataError(path.string() + ": unsupported cache version " + std::to_string(version));
  const auto rows = io::get<std::uint32_t>(is, "row count");
  const auto fields = io::get<std::uint32_t>(is, "field count");
  if (fields == 0) throw DataError(path.string() + ": zero fields");
  Dataset out;
  out.n_fields = fields;
  out.indices.reserve(static_cast<std::size_t>(rows) * fields);
  out.labels.reserve(rows);
  for (std::uint32_t i = 0; i < rows; ++i) {
    for (std::uint32_t f = 0; f < fields; ++f) out.indices.push_back(io::get<std::uint32_t>(is, "index"));
    const auto label = io::get<std::uint8_t>(is, "label");
    if (label > 1) throw DataError(path.string() + ": label out of range in row " + std::to_string(i));
    out.labels.push_back(label);
  }
  return out;
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * (epoch + 1));
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

}  // namespace dcpcc
