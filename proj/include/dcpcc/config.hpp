#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dcpcc/data.hpp"
#include "dcpcc/losses.hpp"
#include "dcpcc/models.hpp"
#include "dcpcc/optim.hpp"

namespace dcpcc {

inline constexpr const char* kOutputRootEnv = "DCPCC_OUTPUT_ROOT";

enum class DataKind { csv, dense_csv, synthetic };

// Everything needed to reproduce a training run. Serialized as `key=value`
// lines; every field has a dotted key (see RunConfig::keys()).
struct RunConfig {
  DataKind data_kind = DataKind::synthetic;
  std::filesystem::path data_path;
  SchemaConfig schema;
  std::filesystem::path cache_path;
  SplitSpec split;
  SyntheticConfig synth;

  BackboneConfig backbone;
  std::size_t embedding_dim = 10;

  LossConfig loss;
  double vertex_lr = 0.1;
  AdamConfig adam;
  PlateauConfig sched;
  // Stop after this many learning-rate reductions without improvement.
  std::size_t early_stop = 2;

  std::size_t batch_size = 1024;
  std::size_t max_epochs = 20;
  std::uint64_t seed = 42;

  std::filesystem::path output_root = "runs";
  std::string run_name = "run";

  struct Key {
    std::string name;
    std::string help;
  };
  static const std::vector<Key>& keys();

  // Unknown keys and malformed values raise ConfigError.
  void set(std::string_view key, std::string_view value);
  [[nodiscard]] std::string get(std::string_view key) const;
  void apply(const std::map<std::string, std::string>& values);

  [[nodiscard]] std::map<std::string, std::string> to_map() const;
  [[nodiscard]] std::string to_text() const;
  void validate() const;

  [[nodiscard]] std::filesystem::path run_dir() const { return output_root / run_name; }
  [[nodiscard]] HeadKind head_kind() const;
};

// Parses `key=value` lines; blank lines and lines starting with '#' are
// skipped.
std::map<std::string, std::string> parse_config_text(std::string_view text, std::string_view source = "<config>");
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

// Defaults, then the config file (if any), then the output-root environment
// variable, then explicit overrides.
RunConfig resolve_run_config(const std::filesystem::path& config_file,
                             const std::map<std::string, std::string>& overrides);

}  // namespace dcpcc
