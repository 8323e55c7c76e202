#include "dcpcc/trainer.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "dcpcc/checkpoint.hpp"
#include "dcpcc/errors.hpp"
#include "dcpcc/losses.hpp"
#include "dcpcc/optim.hpp"
#include "dcpcc/pcc_head.hpp"

namespace dcpcc {

namespace {

std::filesystem::path schema_sidecar(const std::filesystem::path& cache) {
  auto p = cache;
  p += ".schema.json";
  return p;
}

PreparedData prepare_csv(const RunConfig& config, const DatasetSchema* given) {
  PreparedData out;
  const bool use_cache = !config.cache_path.empty() && given == nullptr;
  if (use_cache && std::filesystem::exists(config.cache_path) &&
      std::filesystem::exists(schema_sidecar(config.cache_path))) {
    const Dataset all = read_cache(config.cache_path);
    out.schema = DatasetSchema::load(schema_sidecar(config.cache_path));
    out.splits = split(all, config.split);
    return out;
  }

  const RawTable table = read_csv(config.data_path);
  const SplitIndices idx = split_indices(table.rows.size(), config.split);
  out.schema = given != nullptr ? *given : build_vocab(table, idx.train, config.schema);
  out.splits.train = encode_rows(table, idx.train, *out.schema);
  out.splits.validation = encode_rows(table, idx.validation, *out.schema);
  out.splits.test = encode_rows(table, idx.test, *out.schema);

  if (use_cache) {
    std::vector<std::size_t> all(table.rows.size());
    std::iota(all.begin(), all.end(), 0);
    write_cache(config.cache_path, encode_rows(table, all, *out.schema));
    out.schema->save(schema_sidecar(config.cache_path));
  }
  return out;
}

std::vector<double> to_probabilities(const std::vector<double>& scores) { return predict_proba(scores); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write " + path.string());
  os << text;
}

}  // namespace

PreparedData prepare_data(const RunConfig& config, const DatasetSchema* schema) {
  switch (config.data_kind) {
    case DataKind::csv: return prepare_csv(config, schema);
    case DataKind::dense_csv: {
      PreparedData out;
      out.splits = split(read_dense_csv(config.data_path, config.schema.label_column), config.split);
      return out;
    }
    case DataKind::synthetic: {
      PreparedData out;
      out.splits = split(generate_synthetic(config.synth), config.split);
      return out;
    }
  }
  throw ConfigError("unknown data kind");
}

ModelConfig model_config(const RunConfig& config, const PreparedData& data) {
  ModelConfig mc;
  mc.backbone = config.backbone;
  mc.embedding_dim = config.embedding_dim;
  if (data.schema) {
    mc.table_rows = data.schema->table_rows();
  } else {
    mc.dense_dim = data.splits.train.dense_dim;
  }
  mc.head = config.head_kind();
  mc.kappa = config.loss.kappa;
  mc.seed = config.seed;
  return mc;
}

std::string EpochRecord::line() const {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(10);
  os << "epoch=" << epoch << " split=" << split << " auc=" << auc << " logloss=" << logloss;
  os.unsetf(std::ios::fixed);
  os.precision(6);
  os << " lr=" << lr;
  return os.str();
}

Trainer::Trainer(RunConfig config, PreparedData data)
    : config_(std::move(config)), data_(std::move(data)), model_(model_config(config_, data_)) {
  config_.validate();
}

MetricsReport evaluate(Model& model, const Dataset& data, std::optional<double> baseline_auc) {
  const auto out = model.infer(data);
  return make_report(out.scores, to_probabilities(out.scores), data.labels, baseline_auc);
}

TrainResult Trainer::run(bool write_outputs) {
  const Dataset& train_set = data_.splits.train;
  const Dataset& val_set = data_.splits.validation;
  const bool conic = model_.has_conic_head();

  std::vector<Tensor*> params;
  for (auto& p : model_.parameters()) params.push_back(p.tensor);
  Adam adam(params, config_.adam);
  std::optional<VertexTracker> tracker;
  if (conic) tracker.emplace(model_.conic().s, config_.vertex_lr);
  PlateauScheduler scheduler(config_.sched);

  TrainResult result;
  result.run_dir = config_.run_dir();
  std::ofstream metrics_log;
  if (write_outputs) {
    std::filesystem::create_directories(result.run_dir);
    write_text(result.run_dir / "config.txt", config_.to_text());
    if (data_.schema) data_.schema->save(result.run_dir / "schema.json");
    metrics_log.open(result.run_dir / "metrics.log");
  }

  std::map<std::string, Tensor> best_state;
  auto snapshot = [&] {
    best_state.clear();
    for (auto& p : model_.state()) best_state.emplace(p.name, *p.tensor);
  };
  snapshot();
  double best_auc = -1.0;

  for (std::size_t epoch = 1; epoch <= config_.max_epochs; ++epoch) {
    const auto order = epoch_order(train_set.size(), config_.seed, epoch);
    std::vector<double> train_scores;
    std::vector<std::uint8_t> train_labels;
    train_scores.reserve(train_set.size());
    train_labels.reserve(train_set.size());
    double loss_sum = 0.0;
    std::size_t n_batches = 0;

    for (std::size_t begin = 0; begin < order.size(); begin += config_.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config_.batch_size);
      const Dataset batch =
          train_set.subset(std::span<const std::size_t>(order).subspan(begin, end - begin));
      try {
        Tape tape;
        Var f = model_.represent(tape, batch);
        Var scores = model_.score(tape, f);
        std::optional<ConeVars> cone;
        if (conic) cone = bind_cone(tape, model_.conic());
        Var loss = build_loss(tape, scores, batch.labels, cone, config_.loss);
        const double loss_value = tape.value(loss).item();
        if (!std::isfinite(loss_value)) throw NumericError("non-finite loss");
        tape.backward(loss);
        adam.step();
        if (tracker) {
          tracker->update(tape.value(f), batch.labels);
          ++result.vertex_updates;
        }
        loss_sum += loss_value;
        const auto sv = tape.value(scores).values();
        train_scores.insert(train_scores.end(), sv.begin(), sv.end());
        train_labels.insert(train_labels.end(), batch.labels.begin(), batch.labels.end());
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + " batch " + std::to_string(n_batches) + ": " + e.what());
      }
      ++n_batches;
      if (on_step) on_step(epoch, n_batches - 1);
    }
    result.epoch_loss.push_back(loss_sum / static_cast<double>(n_batches));

    EpochRecord train_rec{epoch, "train", 0.0, 0.0, adam.lr()};
    try {
      train_rec.auc = auc(train_scores, train_labels);
    } catch (const DataError&) {
      train_rec.auc = std::nan("");
    }
    train_rec.logloss = logloss(to_probabilities(train_scores), train_labels);
    const MetricsReport val = evaluate(model_, val_set);
    EpochRecord val_rec{epoch, "val", val.auc, val.logloss, adam.lr()};
    result.log.push_back(train_rec);
    result.log.push_back(val_rec);
    if (metrics_log) {
      metrics_log << train_rec.line() << '\n' << val_rec.line() << '\n';
      metrics_log.flush();
    }

    if (val.auc > best_auc) {
      best_auc = val.auc;
      result.best_epoch = epoch;
      snapshot();
      if (write_outputs) save_checkpoint(result.run_dir / "checkpoint.pcc", model_);
    }

    const LearningRates lrs = scheduler.step(val.auc, {adam.lr(), tracker ? tracker->learning_rate() : 0.0});
    adam.set_lr(lrs.model);
    if (tracker) tracker->set_learning_rate(lrs.vertex);
    if (config_.early_stop > 0 && scheduler.reductions_without_improvement() >= config_.early_stop) {
      result.stopped_early = epoch < config_.max_epochs;
      break;
    }
  }

  if (on_finish) on_finish(model_);
  model_.load_state(best_state);
  result.best_val_auc = best_auc;
  result.test = evaluate(model_, data_.splits.test);
  if (write_outputs) {
    std::ostringstream summary;
    summary << "best_epoch=" << result.best_epoch << '\n';
    summary.precision(10);
    summary << "best_val_auc=" << result.best_val_auc << '\n';
    summary << "test " << result.test.record() << '\n';
    write_text(result.run_dir / "summary.txt", summary.str());
  }
  return result;
}

TrainResult train(const RunConfig& config) {
  config.validate();
  Trainer trainer(config, prepare_data(config));
  return trainer.run(true);
}

LoadedRun load_run(const std::filesystem::path& run_dir) {
  if (!std::filesystem::exists(run_dir / "config.txt") || !std::filesystem::exists(run_dir / "checkpoint.pcc")) {
    throw DataError("not a run directory (missing config.txt or checkpoint.pcc): " + run_dir.string());
  }
  RunConfig config;
  config.apply(read_config_file(run_dir / "config.txt"));
  std::optional<DatasetSchema> schema;
  if (config.data_kind == DataKind::csv) schema = DatasetSchema::load(run_dir / "schema.json");

  ModelConfig mc;
  mc.backbone = config.backbone;
  mc.embedding_dim = config.embedding_dim;
  mc.head = config.head_kind();
  mc.kappa = config.loss.kappa;
  mc.seed = config.seed;
  if (schema) {
    mc.table_rows = schema->table_rows();
  } else {
    mc.dense_dim = config.data_kind == DataKind::synthetic ? config.synth.dim : 0;
  }
  const auto blocks = load_checkpoint(run_dir / "checkpoint.pcc");
  if (!schema && mc.dense_dim == 0) {
    auto it = blocks.find(config.backbone.kind == BackboneKind::dcnv2 ? "cross.0.weight" : "dnn.0.weight");
    if (it == blocks.end()) throw DataError("checkpoint lacks the first backbone layer");
    mc.dense_dim = it->second.rows();
  }
  LoadedRun run{config, schema, Model(mc)};
  run.model.load_state(blocks);
  return run;
}

Dataset load_split(const LoadedRun& run, const std::string& split_name) {
  PreparedData data = prepare_data(run.config, run.schema ? &*run.schema : nullptr);
  if (split_name == "train") return std::move(data.splits.train);
  if (split_name == "val" || split_name == "validation") return std::move(data.splits.validation);
  if (split_name == "test") return std::move(data.splits.test);
  throw ConfigError("unknown split '" + split_name + "' (expected train, val or test)");
}

Dataset load_external(const LoadedRun& run, const std::filesystem::path& csv) {
  if (!run.schema) return read_dense_csv(csv, run.config.schema.label_column);
  const RawTable table = read_csv(csv);
  std::vector<std::size_t> rows(table.rows.size());
  std::iota(rows.begin(), rows.end(), 0);
  return encode_rows(table, rows, *run.schema);
}

}  // namespace dcpcc
