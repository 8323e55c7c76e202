#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dcpcc/data.hpp"
#include "dcpcc/errors.hpp"
#include "temp_dir.hpp"

using namespace dcpcc;

TEST_CASE("vocabulary enumerates categories in first-seen order") {
  testing::TempDir dir;
  const auto csv = dir.write("a.csv", "label,f1\n1,a\n0,a\n1,b\n");
  const DatasetSchema schema = build_vocab(csv, {});
  REQUIRE(schema.n_fields() == 1);
  const ColumnVocab& v = schema.columns[0];
  CHECK(v.lookup("a") == 0);
  CHECK(v.lookup("b") == 1);
  CHECK(v.oov_index() == 2);
  CHECK(v.table_rows() == 3);
}

TEST_CASE("min frequency drops rare categories to the OOV slot") {
  testing::TempDir dir;
  const auto csv = dir.write("a.csv", "label,f1\n1,a\n0,a\n1,b\n");
  SchemaConfig cfg;
  cfg.min_frequency = 2;
  const DatasetSchema schema = build_vocab(csv, cfg);
  const ColumnVocab& v = schema.columns[0];
  CHECK(v.categories.size() == 1);
  CHECK(v.lookup("a") == 0);
  CHECK(v.oov_index() == 1);
  CHECK(v.lookup("b") == 1);
}

TEST_CASE("encode maps known and unseen categories") {
  testing::TempDir dir;
  const auto csv = dir.write("a.csv", "label,f1\n1,a\n");
  const DatasetSchema schema = build_vocab(csv, {});
  const std::vector<std::size_t> feature_pos = {1};

  const std::vector<std::string> known = {"1", "a"};
  EncodedSample s = encode(known, feature_pos, 0, schema);
  CHECK(s.label == 1);
  CHECK(s.indices == std::vector<std::uint32_t>{0});

  const std::vector<std::string> unseen = {"0", "zzz"};
  s = encode(unseen, feature_pos, 0, schema);
  CHECK(s.label == 0);
  CHECK(s.indices == std::vector<std::uint32_t>{schema.columns[0].oov_index()});
}

TEST_CASE("three-field rating table encodes three indices per row") {
  testing::TempDir dir;
  const auto csv = dir.write("ml.csv", "label,user_id,item_id,tag_id\n1,u1,i1,t1\n0,u2,i1,t2\n1,u1,i3,t1\n");
  const RawTable table = read_csv(csv);
  std::vector<std::size_t> rows(table.rows.size());
  std::iota(rows.begin(), rows.end(), 0);
  const DatasetSchema schema = build_vocab(table, rows, {});
  const Dataset data = encode_rows(table, rows, schema);
  CHECK(data.n_fields == 3);
  CHECK(data.indices.size() == 3 * data.size());
}

TEST_CASE("ten-field app-usage table gives ten feature columns") {
  testing::TempDir dir;
  const auto csv = dir.write(
      "frappe.csv",
      "label,user,item,daytime,weekday,isweekend,homework,cost,weather,country,city\n"
      "1,u0,i0,morning,monday,workday,unknown,free,sunny,US,c1\n"
      "0,u0,i1,evening,sunday,weekend,home,paid,rainy,US,c2\n");
  CHECK(build_vocab(csv, {}).n_fields() == 10);
}

TEST_CASE("malformed rows produce line-numbered errors") {
  testing::TempDir dir;
  const auto ragged = dir.write("r.csv", "label,f1\n1,a\n0\n");
  try {
    (void)read_csv(ragged);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }

  const auto bad_label = dir.write("l.csv", "label,f1\n1,a\nyes,b\n");
  const RawTable table = read_csv(bad_label);
  const std::vector<std::size_t> rows = {0, 1};
  const DatasetSchema schema = build_vocab(table, rows, {});
  try {
    (void)encode_rows(table, rows, schema);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(read_csv(dir / "missing.csv"), DataError);
  CHECK_THROWS_AS(build_vocab(dir.write("nl.csv", "f1\na\n"), {}), DataError);
}

TEST_CASE("every row of the training file either encodes or errors with a line number") {
  testing::TempDir dir;
  std::mt19937_64 rng(17);
  std::string text = "label,a,b\n";
  for (int i = 0; i < 200; ++i) {
    text += std::to_string(rng() % 2) + ",a" + std::to_string(rng() % 7) + ",b" + std::to_string(rng() % 3) + "\n";
  }
  const RawTable table = read_csv(dir.write("t.csv", text));
  std::vector<std::size_t> rows(table.rows.size());
  std::iota(rows.begin(), rows.end(), 0);
  const DatasetSchema schema = build_vocab(table, rows, {});
  const Dataset data = encode_rows(table, rows, schema);
  CHECK(data.size() == 200);
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (std::size_t f = 0; f < 2; ++f) CHECK(data.indices[r * 2 + f] < schema.columns[f].oov_index());
  }
}

TEST_CASE("split sizes, determinism and seed sensitivity") {
  SplitSpec spec;
  spec.seed = 1;
  const SplitIndices a = split_indices(10, spec);
  CHECK(a.train.size() == 8);
  CHECK(a.validation.size() == 1);
  CHECK(a.test.size() == 1);

  const SplitIndices b = split_indices(10, spec);
  CHECK(a.train == b.train);
  CHECK(a.validation == b.validation);
  CHECK(a.test == b.test);

  std::vector<std::size_t> all = a.train;
  all.insert(all.end(), a.validation.begin(), a.validation.end());
  all.insert(all.end(), a.test.begin(), a.test.end());
  std::vector<std::size_t> sorted = all;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> expect(10);
  std::iota(expect.begin(), expect.end(), 0);
  CHECK(sorted == expect);

  spec.seed = 2;
  const SplitIndices c = split_indices(10, spec);
  std::vector<std::size_t> other = c.train;
  other.insert(other.end(), c.validation.begin(), c.validation.end());
  other.insert(other.end(), c.test.begin(), c.test.end());
  CHECK(other != all);

  CHECK_THROWS_AS(split_indices(2, SplitSpec{}), DataError);
  CHECK_THROWS_AS(split_indices(10, SplitSpec{0.5, 0.5, 0.5, 1}), ConfigError);
}

TEST_CASE("synthetic generator counts positives exactly") {
  SyntheticConfig cfg;
  cfg.n_samples = 1000;
  cfg.positive_fraction = 0.1;
  const Dataset d = generate_synthetic(cfg);
  CHECK(d.size() == 1000);
  CHECK(d.n_positives() == 100);
  CHECK(d.dense_dim == 8);

  const Dataset def = generate_synthetic(SyntheticConfig{});
  CHECK(def.size() == 50000);
  CHECK(def.n_positives() == static_cast<std::size_t>(std::llround(50000.0 / 11.0)));
}

TEST_CASE("degenerate positive sigma puts every positive on the center") {
  SyntheticConfig cfg;
  cfg.n_samples = 500;
  cfg.positive_sigma = 1e-300;
  const Dataset d = generate_synthetic(cfg);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.labels[i] != 1) continue;
    for (std::size_t m = 0; m < d.dense_dim; ++m) CHECK(std::abs(d.dense[i * d.dense_dim + m]) < 1e-250);
  }
  cfg.positive_sigma = 0.0;
  CHECK_THROWS_AS(generate_synthetic(cfg), ConfigError);
}

TEST_CASE("pipeline is bit-identical under the same seed") {
  SyntheticConfig cfg;
  cfg.n_samples = 2000;
  CHECK(generate_synthetic(cfg) == generate_synthetic(cfg));
  cfg.seed = 8;
  SyntheticConfig other;
  other.n_samples = 2000;
  CHECK_FALSE(generate_synthetic(cfg) == generate_synthetic(other));

  testing::TempDir dir;
  const auto csv = dir.write("t.csv", "label,f\n1,a\n0,b\n1,a\n0,c\n1,b\n0,a\n1,c\n0,b\n1,a\n0,a\n");
  auto run = [&] {
    const RawTable t = read_csv(csv);
    const SplitIndices idx = split_indices(t.rows.size(), SplitSpec{});
    const DatasetSchema s = build_vocab(t, idx.train, {});
    return encode_rows(t, idx.train, s);
  };
  CHECK(run() == run());
}

TEST_CASE("dense CSV and binary cache round-trip") {
  testing::TempDir dir;
  SyntheticConfig cfg;
  cfg.n_samples = 300;
  const Dataset d = generate_synthetic(cfg);
  write_dense_csv(dir / "d.csv", d);
  const Dataset back = read_dense_csv(dir / "d.csv");
  CHECK(back == d);

  Dataset cat;
  cat.n_fields = 2;
  cat.indices = {0, 1, 2, 0, 1, 1};
  cat.labels = {1, 0, 1};
  write_cache(dir / "c.bin", cat);
  CHECK(read_cache(dir / "c.bin") == cat);

  std::ofstream(dir / "junk.bin") << "nope";
  CHECK_THROWS_AS(read_cache(dir / "junk.bin"), DataError);
}

TEST_CASE("epoch order is a seeded permutation") {
  const auto a = epoch_order(100, 5, 1);
  CHECK(a == epoch_order(100, 5, 1));
  CHECK(a != epoch_order(100, 5, 2));
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == i);
}
