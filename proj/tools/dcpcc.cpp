#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dcpcc/config.hpp"
#include "dcpcc/errors.hpp"
#include "dcpcc/geometry.hpp"
#include "dcpcc/published.hpp"
#include "dcpcc/trainer.hpp"

namespace {

using namespace dcpcc;

enum Exit { kOk = 0, kConfig = 1, kData = 2, kNumeric = 3 };

// Registers --<key> for every RunConfig field; values land in `overrides`.
void add_config_flags(CLI::App& cmd, std::map<std::string, std::string>& overrides, std::string_view only_prefix = {}) {
  for (const auto& key : RunConfig::keys()) {
    if (!only_prefix.empty() && key.name.rfind(only_prefix, 0) != 0) continue;
    const std::string name = key.name;
    cmd.add_option_function<std::string>(
        "--" + name, [&overrides, name](const std::string& v) { overrides[name] = v; }, key.help)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

std::string fraction(const std::optional<double>& v) { return v ? fmt(*v) : std::string("n/a"); }

int cmd_train(const std::string& config_file, const std::map<std::string, std::string>& overrides) {
  const RunConfig config = resolve_run_config(config_file, overrides);
  const TrainResult result = train(config);
  for (const auto& rec : result.log) std::cout << rec.line() << '\n';
  std::cout << "best_epoch=" << result.best_epoch << " best_val_auc=" << fmt(result.best_val_auc, 10) << '\n';
  std::cout << "test " << result.test.record() << '\n';
  std::cout << "run_dir=" << result.run_dir.string() << '\n';
  return kOk;
}

int cmd_evaluate(const std::string& run_dir, const std::string& split_name, const std::string& data_path,
                 std::optional<double> baseline) {
  LoadedRun run = load_run(run_dir);
  const Dataset data = data_path.empty() ? load_split(run, split_name) : load_external(run, data_path);
  const MetricsReport report = evaluate(run.model, data, baseline);
  std::cout << report.text();
  return kOk;
}

std::vector<double> parse_offsets(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("invalid sweep offset '" + item + "'");
    }
  }
  return out;
}

struct AnalyzeOptions {
  std::string run_dir;
  std::string split = "test";
  std::size_t directions = 1000;
  std::uint64_t seed = 1;
  std::size_t samples = 100000;
  std::string directions_csv;
  std::string sweep_csv;
  std::string sweep_offsets;
};

int cmd_analyze(const AnalyzeOptions& opt) {
  LoadedRun run = load_run(opt.run_dir);
  if (!run.model.has_conic_head()) throw ConfigError("analyze needs a conic head; this run uses a linear head");
  const double kappa = run.config.loss.kappa;
  const ConeHeadParams params = run.model.conic().params();
  const Dataset data = load_split(run, opt.split);
  const RegionReport report = region_report(run.model, data, kappa);

  const Certificate& cert = report.certificate;
  std::cout << "certification=" << (cert.certified ? "certified" : "not-certified") << '\n';
  std::cout << "b=" << fmt(cert.b) << " min_slack=" << fmt(cert.min_slack) << " tightest_dim=" << cert.tightest_dim
            << '\n';
  std::cout << "split=" << opt.split << " n_pos=" << report.n_positives << " n_neg=" << report.n_negatives
            << " positive_inside=" << fraction(report.positive_inside)
            << " negative_inside=" << fraction(report.negative_inside) << '\n';
  if (auto lv = exact_log_volume(params)) std::cout << "log_volume=" << fmt(*lv, 10) << '\n';

  const auto probes = probe_directions(params, opt.directions, opt.seed);
  std::size_t bounded = 0;
  double t_min = INFINITY, t_max = 0.0;
  for (const auto& p : probes) {
    if (!p.crossing.bounded) continue;
    ++bounded;
    t_min = std::min(t_min, p.crossing.t_star);
    t_max = std::max(t_max, p.crossing.t_star);
  }
  std::cout << "directions=" << probes.size() << " bounded=" << bounded;
  if (bounded > 0) std::cout << " t_min=" << fmt(t_min) << " t_max=" << fmt(t_max);
  std::cout << '\n';

  if (!opt.directions_csv.empty()) {
    std::ofstream os(opt.directions_csv);
    if (!os) throw DataError("cannot write " + opt.directions_csv);
    os.precision(17);
    for (std::size_t m = 0; m < params.dim(); ++m) os << 'd' << m << ',';
    os << "bounded,t_star\n";
    for (const auto& p : probes) {
      for (double v : p.direction) os << v << ',';
      os << (p.crossing.bounded ? 1 : 0) << ',' << p.crossing.t_star << '\n';
    }
  }

  if (!opt.sweep_csv.empty()) {
    std::vector<double> offsets;
    if (opt.sweep_offsets.empty()) {
      for (int i = 1; i <= 8; ++i) offsets.push_back(params.b * 0.25 * i);
    } else {
      offsets = parse_offsets(opt.sweep_offsets);
    }
    RegionProbeConfig probe;
    probe.n_volume_samples = opt.samples;
    probe.seed = opt.seed;
    const auto points = volume_sweep(params, offsets, probe);
    std::ofstream os(opt.sweep_csv);
    if (!os) throw DataError("cannot write " + opt.sweep_csv);
    os.precision(17);
    os << "b,log_volume,mc_volume,mc_standard_error\n";
    for (const auto& pt : points) {
      os << pt.b << ',';
      if (pt.log_volume) os << *pt.log_volume;
      os << ',';
      if (pt.monte_carlo) os << pt.monte_carlo->volume << ',' << pt.monte_carlo->standard_error;
      else os << ',';
      os << '\n';
    }
  }
  return kOk;
}

int cmd_synth(const std::string& output, const std::map<std::string, std::string>& overrides) {
  RunConfig config;
  config.apply(overrides);
  config.validate();
  const Dataset data = generate_synthetic(config.synth);
  write_dense_csv(output, data);
  std::cout << "wrote " << data.size() << " rows (" << data.n_positives() << " positive) to " << output << '\n';
  return kOk;
}

int cmd_reproduce(const std::string& id) {
  std::vector<ReproducedCell> cells;
  try {
    cells = reproduce_table(id);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  std::cout << format_reproduction(cells);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polyhedral conic CTR prediction"};
  app.require_subcommand(1);

  std::map<std::string, std::string> overrides;
  std::string config_file;

  auto* train_cmd = app.add_subcommand("train", "Train a model and write a run directory");
  train_cmd->add_option("--config", config_file, "key=value config file");
  add_config_flags(*train_cmd, overrides);

  std::string run_dir, split_name = "test", data_path;
  std::optional<double> baseline;
  auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a trained run on one split");
  eval_cmd->add_option("--run", run_dir, "run directory")->required();
  eval_cmd->add_option("--split", split_name, "train, val or test");
  eval_cmd->add_option("--data", data_path, "external CSV encoded with the run's schema");
  eval_cmd->add_option("--baseline-auc", baseline, "baseline AUC for RelaImp");

  AnalyzeOptions aopt;
  auto* analyze_cmd = app.add_subcommand("analyze", "Report acceptance-region geometry of a trained conic head");
  analyze_cmd->add_option("--run", aopt.run_dir, "run directory")->required();
  analyze_cmd->add_option("--split", aopt.split, "split used for region membership");
  analyze_cmd->add_option("--directions", aopt.directions, "number of random directions");
  analyze_cmd->add_option("--seed", aopt.seed, "probe seed");
  analyze_cmd->add_option("--samples", aopt.samples, "Monte Carlo samples per sweep point");
  analyze_cmd->add_option("--directions-csv", aopt.directions_csv, "write direction,t* pairs");
  analyze_cmd->add_option("--sweep-csv", aopt.sweep_csv, "write the (b, volume) sweep");
  analyze_cmd->add_option("--sweep-offsets", aopt.sweep_offsets, "comma-separated b values");

  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Write the synthetic benchmark as dense CSV");
  synth_cmd->add_option("--output", synth_out, "output CSV path")->required();
  add_config_flags(*synth_cmd, overrides, "synth.");

  std::string table_id = "table2";
  auto* table_cmd = app.add_subcommand("reproduce-table", "Recompute RelaImp from published AUC values");
  table_cmd->add_option("id", table_id, "table id");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*train_cmd) return cmd_train(config_file, overrides);
    if (*eval_cmd) return cmd_evaluate(run_dir, split_name, data_path, baseline);
    if (*analyze_cmd) return cmd_analyze(aopt);
    if (*synth_cmd) return cmd_synth(synth_out, overrides);
    if (*table_cmd) return cmd_reproduce(table_id);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const ShapeError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::domain_error& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  }
  return kOk;
}
