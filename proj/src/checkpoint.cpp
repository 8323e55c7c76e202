#include "dcpcc/checkpoint.hpp"

#include <fstream>
#include <limits>

#include "binary_io.hpp"
#include "dcpcc/errors.hpp"

namespace dcpcc {

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedParam>& blocks) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write checkpoint " + path.string());
  os.write("PCC1", 4);
  io::put<std::uint16_t>(os, kCheckpointVersion);
  for (const auto& block : blocks) {
    if (block.name.size() > std::numeric_limits<std::uint16_t>::max()) throw DataError("parameter name too long");
    io::put<std::uint16_t>(os, static_cast<std::uint16_t>(block.name.size()));
    os.write(block.name.data(), static_cast<std::streamsize>(block.name.size()));
    const Shape shape = block.tensor->shape();
    io::put<std::uint16_t>(os, 2);
    io::put<std::uint32_t>(os, static_cast<std::uint32_t>(shape.rows));
    io::put<std::uint32_t>(os, static_cast<std::uint32_t>(shape.cols));
    for (double v : block.tensor->values()) io::put_f64(os, v);
  }
  if (!os) throw DataError("failed writing checkpoint " + path.string());
}

std::map<std::string, Tensor> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open checkpoint " + path.string());
  io::expect_magic(is, "PCC1", path.string());
  const auto version = io::get<std::uint16_t>(is, "checkpoint version");
  if (version != kCheckpointVersion) {
    throw DataError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  std::map<std::string, Tensor> blocks;
  while (is.peek() != std::char_traits<char>::eof()) {
    const auto name_len = io::get<std::uint16_t>(is, "block name length");
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    if (is.gcount() != name_len) throw DataError(path.string() + ": truncated block name");
    const auto rank = io::get<std::uint16_t>(is, "block rank");
    if (rank == 0 || rank > 2) throw DataError(path.string() + ": block '" + name + "' has unsupported rank");
    std::size_t dims[2] = {1, 1};
    for (std::uint16_t r = 0; r < rank; ++r) dims[r] = io::get<std::uint32_t>(is, "block dim");
    const Shape shape = rank == 1 ? Shape{dims[0], 1} : Shape{dims[0], dims[1]};
    std::vector<double> values(shape.size());
    for (double& v : values) v = io::get_f64(is, "block data");
    if (!blocks.emplace(name, Tensor(shape, std::move(values))).second) {
      throw DataError(path.string() + ": duplicate block '" + name + "'");
    }
  }
  return blocks;
}

}  // namespace dcpcc
