#pragma once

// Checkpoint layout (little-endian):
//   "PCC1" | u16 version
//   repeated until EOF:
//     u16 name length | UTF-8 name | u16 rank | rank x u32 dims | f64 data

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dcpcc/autodiff.hpp"
#include "dcpcc/models.hpp"

namespace dcpcc {

inline constexpr std::uint16_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedParam>& blocks);
std::map<std::string, Tensor> load_checkpoint(const std::filesystem::path& path);

inline void save_checkpoint(const std::filesystem::path& path, Model& model) { save_checkpoint(path, model.state()); }

}  // namespace dcpcc
