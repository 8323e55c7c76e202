#include <doctest.h>

#include <fstream>

#include "dcpcc/checkpoint.hpp"
#include "dcpcc/errors.hpp"
#include "temp_dir.hpp"

using namespace dcpcc;

TEST_CASE("checkpoint round-trips every block bit for bit") {
  testing::TempDir dir;
  ModelConfig mc;
  mc.dense_dim = 5;
  mc.backbone.kind = BackboneKind::dcnv2;
  Model model(mc);
  save_checkpoint(dir / "m.pcc", model);
  const auto blocks = load_checkpoint(dir / "m.pcc");
  const auto state = model.state();
  CHECK(blocks.size() == state.size());
  for (const auto& p : state) {
    REQUIRE(blocks.count(p.name) == 1);
    const Tensor& t = blocks.at(p.name);
    CHECK(t.shape() == p.tensor->shape());
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(t[i] == (*p.tensor)[i]);
  }
  mc.seed = 1;
  Model other(mc);
  other.load_state(blocks);
  CHECK(other.conic().b[0] == model.conic().b[0]);
}

TEST_CASE("checkpoint layout starts with the magic and version") {
  testing::TempDir dir;
  Tensor t = Tensor::row({1.5});
  save_checkpoint(dir / "t.pcc", {{"x", &t}});
  std::ifstream is(dir / "t.pcc", std::ios::binary);
  char magic[4];
  is.read(magic, 4);
  CHECK(std::string(magic, 4) == "PCC1");
  unsigned char version[2];
  is.read(reinterpret_cast<char*>(version), 2);
  CHECK(version[0] == 1);
  CHECK(version[1] == 0);
  // name block, rank 2, dims 1 x 1, one f64
  CHECK(std::filesystem::file_size(dir / "t.pcc") == 4 + 2 + 2 + 1 + 2 + 8 + 8);
}

TEST_CASE("corrupt checkpoints are data errors") {
  testing::TempDir dir;
  std::ofstream(dir / "bad.pcc") << "PCC2";
  CHECK_THROWS_AS(load_checkpoint(dir / "bad.pcc"), DataError);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.pcc"), DataError);

  Tensor t({2, 2}, 1.0);
  save_checkpoint(dir / "ok.pcc", {{"x", &t}});
  std::filesystem::resize_file(dir / "ok.pcc", std::filesystem::file_size(dir / "ok.pcc") - 3);
  CHECK_THROWS_AS(load_checkpoint(dir / "ok.pcc"), DataError);
}
