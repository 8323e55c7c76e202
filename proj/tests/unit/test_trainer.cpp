#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "dcpcc/checkpoint.hpp"
#include "dcpcc/errors.hpp"
#include "dcpcc/pcc_head.hpp"
#include "dcpcc/trainer.hpp"
#include "temp_dir.hpp"

using namespace dcpcc;

namespace {

RunConfig small_config(const testing::TempDir& dir, const std::string& name) {
  RunConfig c;
  c.synth.n_samples = 3000;
  c.synth.dim = 4;
  c.backbone.hidden = {16, 16};
  c.batch_size = 128;
  c.max_epochs = 3;
  c.output_root = dir.path();
  c.run_name = name;
  return c;
}

double mean_violation(const ConeHeadParams& p, double kappa) {
  double v = 0.0;
  for (double s : constraint_slack(p, kappa)) v += std::max(0.0, -s);
  return v / static_cast<double>(p.dim());
}

}  // namespace

TEST_CASE("five epochs on the synthetic fixture reach high validation AUC") {
  testing::TempDir dir;
  RunConfig c;
  c.max_epochs = 5;
  Trainer t(c, prepare_data(c));
  const TrainResult r = t.run(false);
  CHECK(r.best_val_auc >= 0.95);
  CHECK(r.log.size() <= 10);
}

TEST_CASE("training is deterministic to the last bit") {
  testing::TempDir dir;
  const RunConfig c = small_config(dir, "a");
  Trainer a(c, prepare_data(c));
  Trainer b(c, prepare_data(c));
  const double la = a.run(false).epoch_loss.at(0);
  const double lb = b.run(false).epoch_loss.at(0);
  CHECK(std::memcmp(&la, &lb, sizeof(double)) == 0);
}

TEST_CASE("baseline runs never touch a vertex") {
  testing::TempDir dir;
  RunConfig c = small_config(dir, "bce");
  c.loss.variant = LossVariant::bce;
  const TrainResult r = train(c);
  CHECK(r.vertex_updates == 0);
  const auto blocks = load_checkpoint(r.run_dir / "checkpoint.pcc");
  CHECK(blocks.count("pcc.s") == 0);
  CHECK(blocks.count("linear.weight") == 1);

  RunConfig conic = small_config(dir, "pcbce");
  const TrainResult rc = train(conic);
  CHECK(rc.vertex_updates > 0);
  CHECK(load_checkpoint(rc.run_dir / "checkpoint.pcc").count("pcc.s") == 1);
}

TEST_CASE("run directory reproduces the logged best metric") {
  testing::TempDir dir;
  const RunConfig c = small_config(dir, "run");
  const TrainResult r = train(c);
  for (const char* f : {"config.txt", "metrics.log", "checkpoint.pcc", "summary.txt"}) {
    CHECK(std::filesystem::exists(r.run_dir / f));
  }

  std::ifstream log(r.run_dir / "metrics.log");
  std::string line;
  std::size_t lines = 0;
  std::string best_line;
  while (std::getline(log, line)) {
    ++lines;
    CHECK(line.rfind("epoch=", 0) == 0);
    CHECK(line.find(" split=") != std::string::npos);
    CHECK(line.find(" auc=") != std::string::npos);
    CHECK(line.find(" logloss=") != std::string::npos);
    CHECK(line.find(" lr=") != std::string::npos);
    if (line.rfind("epoch=" + std::to_string(r.best_epoch) + " split=val", 0) == 0) best_line = line;
  }
  CHECK(lines == r.log.size());
  REQUIRE_FALSE(best_line.empty());
  const double logged = std::stod(best_line.substr(best_line.find("auc=") + 4));

  LoadedRun run = load_run(r.run_dir);
  CHECK(run.config.to_map() == c.to_map());
  const MetricsReport val = evaluate(run.model, load_split(run, "val"));
  CHECK(val.auc == r.best_val_auc);
  CHECK(std::abs(val.auc - logged) < 1e-9);
  const MetricsReport test = evaluate(run.model, load_split(run, "test"), 0.76330);
  CHECK(test.auc == r.test.auc);
  CHECK(test.relaimp.has_value());
}

TEST_CASE("categorical CSV runs keep their vocabulary") {
  testing::TempDir dir;
  std::mt19937_64 rng(3);
  std::ostringstream csv;
  csv << "label,user,item\n";
  for (int i = 0; i < 600; ++i) {
    const int u = static_cast<int>(rng() % 20);
    const int it = static_cast<int>(rng() % 15);
    const bool y = (u + it) % 4 == 0 || rng() % 10 == 0;
    csv << (y ? 1 : 0) << ",u" << u << ",i" << it << "\n";
  }
  RunConfig c = small_config(dir, "csv");
  c.data_kind = DataKind::csv;
  c.data_path = dir.write("data.csv", csv.str());
  c.cache_path = dir / "data.cache";
  c.embedding_dim = 4;
  const TrainResult r = train(c);
  CHECK(std::filesystem::exists(r.run_dir / "schema.json"));
  CHECK(std::filesystem::exists(c.cache_path));

  LoadedRun run = load_run(r.run_dir);
  CHECK(evaluate(run.model, load_split(run, "val")).auc == r.best_val_auc);
  const PreparedData cached = prepare_data(c);
  CHECK(cached.splits.train == prepare_data(c, &*run.schema).splits.train);
}

TEST_CASE("non-finite losses abort with the batch index") {
  testing::TempDir dir;
  RunConfig c = small_config(dir, "boom");
  c.adam.lr = 1e300;
  Trainer t(c, prepare_data(c));
  try {
    t.run(false);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("batch ") != std::string::npos);
  }
}

TEST_CASE("larger eta weakly reduces constraint violation") {
  testing::TempDir dir;
  std::vector<double> violation;
  for (double eta : {0.0, 0.01, 1.0}) {
    RunConfig c = small_config(dir, "eta");
    c.loss.eta = eta;
    c.max_epochs = 8;
    c.adam.lr = 0.003;
    Trainer t(c, prepare_data(c));
    for (double& g : t.model().conic().gamma_tilde.values()) g = -0.02;
    t.run(false);
    violation.push_back(mean_violation(t.model().conic().params(), c.loss.kappa));
  }
  MESSAGE("mean violation for eta 0, 0.01, 1: " << violation[0] << " " << violation[1] << " " << violation[2]);
  CHECK(violation[1] <= violation[0] + 1e-12);
  CHECK(violation[2] <= violation[1] + 1e-12);
}

TEST_CASE("missing run directories are data errors") {
  CHECK_THROWS_AS(load_run("/nonexistent/run"), DataError);
}
