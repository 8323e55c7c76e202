#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dcpcc/config.hpp"
#include "dcpcc/data.hpp"
#include "dcpcc/metrics.hpp"
#include "dcpcc/models.hpp"

namespace dcpcc {

struct PreparedData {
  DatasetSplits splits;
  std::optional<DatasetSchema> schema;
};

// Loads or generates the dataset named by the config and splits it. For
// categorical CSV input the vocabulary comes from the training split, or
// from `schema` when given (re-evaluating a finished run).
PreparedData prepare_data(const RunConfig& config, const DatasetSchema* schema = nullptr);

ModelConfig model_config(const RunConfig& config, const PreparedData& data);

struct EpochRecord {
  std::size_t epoch = 0;
  std::string split;
  double auc = 0.0;
  double logloss = 0.0;
  double lr = 0.0;

  // epoch=<n> split=<train|val> auc=<f> logloss=<f> lr=<f>
  [[nodiscard]] std::string line() const;
};

struct TrainResult {
  std::vector<EpochRecord> log;
  std::vector<double> epoch_loss;  // mean training loss per epoch
  std::size_t best_epoch = 0;
  double best_val_auc = 0.0;
  MetricsReport test;
  std::size_t vertex_updates = 0;
  bool stopped_early = false;
  std::filesystem::path run_dir;
};

class Trainer {
 public:
  Trainer(RunConfig config, PreparedData data);

  // Trains, leaves the best-validation weights in model(), and evaluates the
  // test split. With write_outputs the run directory receives config.txt,
  // metrics.log, checkpoint.pcc, summary.txt and (for CSV input) schema.json.
  TrainResult run(bool write_outputs = true);

  [[nodiscard]] Model& model() { return model_; }
  [[nodiscard]] const RunConfig& config() const { return config_; }
  [[nodiscard]] const PreparedData& data() const { return data_; }

  // Optional hook invoked after every optimizer step (epoch, batch index).
  std::function<void(std::size_t, std::size_t)> on_step;
  // Invoked once the last epoch has run, before the best weights are restored.
  std::function<void(Model&)> on_finish;

 private:
  RunConfig config_;
  PreparedData data_;
  Model model_;
};

TrainResult train(const RunConfig& config);

// Scores and probabilities of a dataset under a trained model.
MetricsReport evaluate(Model& model, const Dataset& data, std::optional<double> baseline_auc = std::nullopt);

struct LoadedRun {
  RunConfig config;
  std::optional<DatasetSchema> schema;
  Model model;
};

LoadedRun load_run(const std::filesystem::path& run_dir);
// "train", "val" or "test" split of a finished run, rebuilt from its config.
Dataset load_split(const LoadedRun& run, const std::string& split);
// Encodes an external CSV with the run's vocabulary (or reads dense CSV).
Dataset load_external(const LoadedRun& run, const std::filesystem::path& csv);

}  // namespace dcpcc
