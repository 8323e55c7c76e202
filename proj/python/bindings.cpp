#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <map>
#include <string>
#include <vector>

#include "dcpcc/config.hpp"
#include "dcpcc/errors.hpp"
#include "dcpcc/geometry.hpp"
#include "dcpcc/metrics.hpp"
#include "dcpcc/pcc_head.hpp"
#include "dcpcc/published.hpp"
#include "dcpcc/trainer.hpp"

namespace py = pybind11;
using namespace dcpcc;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using LabelArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const DoubleArray& a) {
  return {a.data(), a.data() + a.size()};
}

std::vector<std::uint8_t> to_labels(const LabelArray& a) {
  return {a.data(), a.data() + a.size()};
}

ConeHeadParams make_params(const DoubleArray& w, const DoubleArray& gamma, double b, const DoubleArray& s) {
  ConeHeadParams p;
  p.w_tilde = to_vector(w);
  p.gamma_tilde = to_vector(gamma);
  p.kind = p.gamma_tilde.size() == 1 && p.w_tilde.size() != 1 ? ConeKind::pcf : ConeKind::epcf;
  p.b = b;
  p.s = to_vector(s);
  p.validate();
  return p;
}

Tensor to_matrix(const DoubleArray& a) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-d array");
  return Tensor({static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1))}, to_vector(a));
}

py::dict report_dict(const MetricsReport& r) {
  py::dict d;
  d["auc"] = r.auc;
  d["logloss"] = r.logloss;
  d["n_positives"] = r.n_positives;
  d["n_negatives"] = r.n_negatives;
  d["relaimp"] = r.relaimp ? py::cast(*r.relaimp) : py::none();
  return d;
}

std::map<std::string, std::string> stringify(const py::dict& overrides) {
  std::map<std::string, std::string> out;
  for (auto [k, v] : overrides) out[py::str(k)] = py::str(v);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Polyhedral conic CTR prediction";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def(
      "auc", [](const DoubleArray& scores, const LabelArray& labels) { return auc(to_vector(scores), to_labels(labels)); },
      py::arg("scores"), py::arg("labels"));
  m.def(
      "logloss",
      [](const DoubleArray& p, const LabelArray& labels) { return logloss(to_vector(p), to_labels(labels)); },
      py::arg("probabilities"), py::arg("labels"));
  m.def("relaimp", &relaimp, py::arg("auc_new"), py::arg("auc_base"));

  m.def(
      "cone_scores",
      [](const DoubleArray& f, const DoubleArray& w, const DoubleArray& gamma, double b, const DoubleArray& s) {
        const ConeHeadParams p = make_params(w, gamma, b, s);
        const Tensor x = to_matrix(f);
        const auto v = p.kind == ConeKind::pcf ? score_pcf(x, p) : score_epcf(x, p);
        return DoubleArray(static_cast<py::ssize_t>(v.size()), v.data());
      },
      py::arg("f"), py::arg("w_tilde"), py::arg("gamma_tilde"), py::arg("b"), py::arg("s"),
      "Scores of each row of f; a one-element gamma_tilde selects the scalar-gamma form.");

  m.def(
      "certify",
      [](const DoubleArray& w, const DoubleArray& gamma, double b, const DoubleArray& s, double kappa) {
        const Certificate c = certify_bounded(make_params(w, gamma, b, s), kappa);
        py::dict d;
        d["certified"] = c.certified;
        d["min_slack"] = c.min_slack;
        d["tightest_dim"] = c.tightest_dim;
        d["slacks"] = c.slacks;
        d["b"] = c.b;
        return d;
      },
      py::arg("w_tilde"), py::arg("gamma_tilde"), py::arg("b"), py::arg("s"), py::arg("kappa") = 0.1);

  m.def(
      "boundary_crossing",
      [](const DoubleArray& w, const DoubleArray& gamma, double b, const DoubleArray& s, const DoubleArray& d) {
        const Crossing c = boundary_crossing(make_params(w, gamma, b, s), to_vector(d));
        return py::make_tuple(c.bounded, c.t_star);
      },
      py::arg("w_tilde"), py::arg("gamma_tilde"), py::arg("b"), py::arg("s"), py::arg("direction"));

  m.def(
      "mc_volume",
      [](const DoubleArray& w, const DoubleArray& gamma, double b, const DoubleArray& s, std::size_t samples,
         std::uint64_t seed) {
        RegionProbeConfig cfg;
        cfg.n_volume_samples = samples;
        cfg.seed = seed;
        const VolumeEstimate v = mc_volume(make_params(w, gamma, b, s), cfg);
        return py::make_tuple(v.volume, v.standard_error);
      },
      py::arg("w_tilde"), py::arg("gamma_tilde"), py::arg("b"), py::arg("s"), py::arg("samples") = 100000,
      py::arg("seed") = 1);

  m.def(
      "exact_log_volume",
      [](const DoubleArray& w, const DoubleArray& gamma, double b, const DoubleArray& s) {
        return exact_log_volume(make_params(w, gamma, b, s));
      },
      py::arg("w_tilde"), py::arg("gamma_tilde"), py::arg("b"), py::arg("s"));

  m.def(
      "synthetic",
      [](const py::dict& overrides) {
        RunConfig c;
        std::map<std::string, std::string> keys;
        for (const auto& [k, v] : stringify(overrides)) keys["synth." + k] = v;
        c.apply(keys);
        const Dataset d = generate_synthetic(c.synth);
        DoubleArray x({static_cast<py::ssize_t>(d.size()), static_cast<py::ssize_t>(d.dense_dim)});
        std::copy(d.dense.begin(), d.dense.end(), x.mutable_data());
        LabelArray y(static_cast<py::ssize_t>(d.size()), d.labels.data());
        return py::make_tuple(x, y);
      },
      py::arg("overrides") = py::dict(), "Synthetic benchmark as (X, y); keys are synth.* names without the prefix.");

  m.def(
      "train",
      [](const py::dict& overrides, const std::string& config_file) {
        const RunConfig c = resolve_run_config(config_file, stringify(overrides));
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(c);
        }
        py::dict d;
        py::list log;
        for (const auto& rec : r.log) log.append(rec.line());
        d["log"] = log;
        d["epoch_loss"] = r.epoch_loss;
        d["best_epoch"] = r.best_epoch;
        d["best_val_auc"] = r.best_val_auc;
        d["test"] = report_dict(r.test);
        d["run_dir"] = r.run_dir.string();
        return d;
      },
      py::arg("overrides") = py::dict(), py::arg("config_file") = std::string(),
      "Trains from config overrides (RunConfig key names) and writes a run directory.");

  m.def(
      "evaluate",
      [](const std::string& run_dir, const std::string& split, std::optional<double> baseline) {
        LoadedRun run = load_run(run_dir);
        const Dataset data = load_split(run, split);
        return report_dict(evaluate(run.model, data, baseline));
      },
      py::arg("run_dir"), py::arg("split") = "test", py::arg("baseline_auc") = py::none());

  m.def(
      "reproduce_table",
      [](const std::string& id) {
        py::list out;
        std::vector<ReproducedCell> cells;
        try {
          cells = reproduce_table(id);
        } catch (const std::invalid_argument& e) {
          throw ConfigError(e.what());
        }
        for (const auto& c : cells) {
          py::dict d;
          d["dataset"] = std::string(c.published.dataset);
          d["model"] = std::string(c.published.model);
          d["base_auc"] = c.published.base_auc;
          d["pcbce_auc"] = c.published.pcbce_auc;
          d["published"] = c.published.relaimp_percent;
          d["recomputed"] = c.recomputed_percent;
          d["matches"] = c.matches();
          out.append(d);
        }
        return out;
      },
      py::arg("table_id") = "table2");
}
