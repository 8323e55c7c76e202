#include "dcpcc/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <system_error>

#include "dcpcc/errors.hpp"

namespace dcpcc {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* first = value.data();
  const auto* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last) {
    throw ConfigError("invalid value '" + std::string(value) + "' for " + std::string(key));
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss{std::string(value)};
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

struct Binding {
  RunConfig::Key key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Binding number(std::string name, std::string help, T RunConfig::*field) {
  std::string key = name;
  return {{std::move(name), std::move(help)},
          [field, key](RunConfig& c, std::string_view v) { c.*field = parse_number<T>(key, v); },
          [field](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return format_double(c.*field);
            } else {
              return std::to_string(c.*field);
            }
          }};
}

// `ref` is a generic lambda returning a reference into RunConfig.
template <typename T, typename Ref>
Binding nested(std::string name, std::string help, Ref ref) {
  std::string key = name;
  return {{std::move(name), std::move(help)},
          [ref, key](RunConfig& c, std::string_view v) { ref(c) = parse_number<T>(key, v); },
          [ref](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return format_double(ref(c));
            } else {
              return std::to_string(ref(c));
            }
          }};
}

const std::vector<Binding>& bindings() {
  static const std::vector<Binding> table = [] {
    std::vector<Binding> b;
    b.push_back({{"data.kind", "csv | dense_csv | synthetic"},
                 [](RunConfig& c, std::string_view v) {
                   if (v == "csv") c.data_kind = DataKind::csv;
                   else if (v == "dense_csv") c.data_kind = DataKind::dense_csv;
                   else if (v == "synthetic") c.data_kind = DataKind::synthetic;
                   else throw ConfigError("invalid data.kind '" + std::string(v) + "'");
                 },
                 [](const RunConfig& c) -> std::string {
                   switch (c.data_kind) {
                     case DataKind::csv: return "csv";
                     case DataKind::dense_csv: return "dense_csv";
                     case DataKind::synthetic: return "synthetic";
                   }
                   return "";
                 }});
    b.push_back({{"data.path", "input CSV file"},
                 [](RunConfig& c, std::string_view v) { c.data_path = std::string(v); },
                 [](const RunConfig& c) { return c.data_path.string(); }});
    b.push_back({{"data.label_column", "name of the 0/1 label column"},
                 [](RunConfig& c, std::string_view v) { c.schema.label_column = std::string(v); },
                 [](const RunConfig& c) { return c.schema.label_column; }});
    b.push_back({{"data.features", "comma-separated feature columns (empty: all but the label)"},
                 [](RunConfig& c, std::string_view v) { c.schema.feature_columns = split_list(v); },
                 [](const RunConfig& c) { return join(c.schema.feature_columns); }});
    b.push_back(nested<std::size_t>("data.min_frequency", "rarer categories map to the OOV slot",
                                    [](auto& c) -> auto& { return c.schema.min_frequency; }));
    b.push_back({{"data.cache", "optional encoded-dataset cache file"},
                 [](RunConfig& c, std::string_view v) { c.cache_path = std::string(v); },
                 [](const RunConfig& c) { return c.cache_path.string(); }});
    b.push_back(nested<double>("split.train", "training fraction", [](auto& c) -> auto& { return c.split.train; }));
    b.push_back(nested<double>("split.val", "validation fraction",
                               [](auto& c) -> auto& { return c.split.validation; }));
    b.push_back(nested<double>("split.test", "test fraction", [](auto& c) -> auto& { return c.split.test; }));
    b.push_back(nested<std::uint64_t>("split.seed", "shuffle seed for the split",
                                      [](auto& c) -> auto& { return c.split.seed; }));
    b.push_back(nested<std::size_t>("synth.n_samples", "synthetic sample count",
                                    [](auto& c) -> auto& { return c.synth.n_samples; }));
    b.push_back(nested<double>("synth.positive_fraction", "fraction of positives in (0, 0.5]",
                               [](auto& c) -> auto& { return c.synth.positive_fraction; }));
    b.push_back(nested<std::size_t>("synth.dim", "feature dimension",
                                    [](auto& c) -> auto& { return c.synth.dim; }));
    b.push_back(nested<double>("synth.positive_sigma", "spread of the positive Gaussian",
                               [](auto& c) -> auto& { return c.synth.positive_sigma; }));
    b.push_back(nested<std::size_t>("synth.negative_components", "negative mixture components",
                                    [](auto& c) -> auto& { return c.synth.negative_components; }));
    b.push_back(nested<double>("synth.shell_radius", "distance of negative centers from the positive center",
                               [](auto& c) -> auto& { return c.synth.shell_radius; }));
    b.push_back(nested<double>("synth.negative_sigma", "spread of each negative component",
                               [](auto& c) -> auto& { return c.synth.negative_sigma; }));
    b.push_back(nested<std::uint64_t>("synth.seed", "generator seed",
                                      [](auto& c) -> auto& { return c.synth.seed; }));
    b.push_back({{"model.backbone", "dnn | dcnv2"},
                 [](RunConfig& c, std::string_view v) {
                   if (v == "dnn") c.backbone.kind = BackboneKind::dnn;
                   else if (v == "dcnv2") c.backbone.kind = BackboneKind::dcnv2;
                   else throw ConfigError("invalid model.backbone '" + std::string(v) + "'");
                 },
                 [](const RunConfig& c) -> std::string {
                   return c.backbone.kind == BackboneKind::dnn ? "dnn" : "dcnv2";
                 }});
    b.push_back({{"model.hidden", "comma-separated hidden layer sizes"},
                 [](RunConfig& c, std::string_view v) {
                   c.backbone.hidden.clear();
                   for (const auto& item : split_list(v)) {
                     c.backbone.hidden.push_back(parse_number<std::size_t>("model.hidden", item));
                   }
                 },
                 [](const RunConfig& c) {
                   std::vector<std::string> items;
                   for (auto h : c.backbone.hidden) items.push_back(std::to_string(h));
                   return join(items);
                 }});
    b.push_back(nested<std::size_t>("model.cross_depth", "number of cross layers (dcnv2)",
                                    [](auto& c) -> auto& { return c.backbone.cross_depth; }));
    b.push_back(number("model.embedding_dim", "embedding dimension", &RunConfig::embedding_dim));
    b.push_back({{"loss.variant", "pcbce | pchinge | pcbce-l1 | pcbce-eta0 | bce | hinge"},
                 [](RunConfig& c, std::string_view v) { c.loss.variant = parse_variant(v); },
                 [](const RunConfig& c) { return std::string(variant_name(c.loss.variant)); }});
    b.push_back(nested<double>("loss.lambda", "L2 weight on w~", [](auto& c) -> auto& { return c.loss.lambda; }));
    b.push_back(nested<double>("loss.eta", "compactness weight", [](auto& c) -> auto& { return c.loss.eta; }));
    b.push_back(nested<double>("loss.kappa", "compactness margin", [](auto& c) -> auto& { return c.loss.kappa; }));
    b.push_back({{"loss.reduction", "mean | sum over the batch for the data term"},
                 [](RunConfig& c, std::string_view v) {
                   if (v == "mean") c.loss.reduction = Reduction::mean;
                   else if (v == "sum") c.loss.reduction = Reduction::sum;
                   else throw ConfigError("invalid loss.reduction '" + std::string(v) + "'");
                 },
                 [](const RunConfig& c) -> std::string { return c.loss.reduction == Reduction::mean ? "mean" : "sum"; }});
    b.push_back(number("vertex.lr", "cone vertex SGD learning rate", &RunConfig::vertex_lr));
    b.push_back(nested<double>("optim.lr", "model Adam learning rate", [](auto& c) -> auto& { return c.adam.lr; }));
    b.push_back(nested<double>("optim.beta1", "Adam beta1", [](auto& c) -> auto& { return c.adam.beta1; }));
    b.push_back(nested<double>("optim.beta2", "Adam beta2", [](auto& c) -> auto& { return c.adam.beta2; }));
    b.push_back(nested<double>("optim.eps", "Adam epsilon", [](auto& c) -> auto& { return c.adam.eps; }));
    b.push_back(nested<double>("sched.factor", "plateau reduction factor",
                               [](auto& c) -> auto& { return c.sched.factor; }));
    b.push_back(nested<std::size_t>("sched.patience", "epochs without improvement before reducing",
                                    [](auto& c) -> auto& { return c.sched.patience; }));
    b.push_back(nested<double>("sched.min_delta", "minimum AUC gain that counts as improvement",
                               [](auto& c) -> auto& { return c.sched.min_delta; }));
    b.push_back(number("train.early_stop", "stop after this many reductions without improvement (0: never)",
                       &RunConfig::early_stop));
    b.push_back(number("train.batch_size", "mini-batch size", &RunConfig::batch_size));
    b.push_back(number("train.max_epochs", "maximum number of epochs", &RunConfig::max_epochs));
    b.push_back(number("train.seed", "initialization and batch-order seed", &RunConfig::seed));
    b.push_back({{"output.root", "root directory for run outputs"},
                 [](RunConfig& c, std::string_view v) { c.output_root = std::string(v); },
                 [](const RunConfig& c) { return c.output_root.string(); }});
    b.push_back({{"output.name", "run directory name under output.root"},
                 [](RunConfig& c, std::string_view v) { c.run_name = std::string(v); },
                 [](const RunConfig& c) { return c.run_name; }});
    return b;
  }();
  return table;
}

const Binding& find_binding(std::string_view key) {
  for (const auto& b : bindings()) {
    if (b.key.name == key) return b;
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

}  // namespace

const std::vector<RunConfig::Key>& RunConfig::keys() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> out;
    for (const auto& b : bindings()) out.push_back(b.key);
    return out;
  }();
  return keys;
}

void RunConfig::set(std::string_view key, std::string_view value) { find_binding(key).set(*this, trim(value)); }

std::string RunConfig::get(std::string_view key) const { return find_binding(key).get(*this); }

void RunConfig::apply(const std::map<std::string, std::string>& values) {
  for (const auto& [k, v] : values) set(k, v);
}

std::map<std::string, std::string> RunConfig::to_map() const {
  std::map<std::string, std::string> out;
  for (const auto& b : bindings()) out[b.key.name] = b.get(*this);
  return out;
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& b : bindings()) out += b.key.name + "=" + b.get(*this) + "\n";
  return out;
}

HeadKind RunConfig::head_kind() const {
  if (!loss.conic()) return HeadKind::linear;
  return loss.scalar_gamma() ? HeadKind::pcf : HeadKind::epcf;
}

void RunConfig::validate() const {
  backbone.validate();
  loss.validate();
  if (data_kind != DataKind::synthetic && data_path.empty()) throw ConfigError("data.path is required for CSV input");
  if (batch_size == 0) throw ConfigError("train.batch_size must be positive");
  if (max_epochs == 0) throw ConfigError("train.max_epochs must be positive");
  if (embedding_dim == 0) throw ConfigError("model.embedding_dim must be positive");
  if (!(vertex_lr > 0.0)) throw ConfigError("vertex.lr must be positive");
  if (!(adam.lr >= 0.0)) throw ConfigError("optim.lr must be non-negative");
  if (schema.min_frequency == 0) throw ConfigError("data.min_frequency must be at least 1");
  if (run_name.empty()) throw ConfigError("output.name must not be empty");
  if (!(split.train > 0 && split.validation > 0 && split.test > 0) ||
      std::abs(split.train + split.validation + split.test - 1.0) > 1e-9) {
    throw ConfigError("split fractions must be positive and sum to 1");
  }
}

std::map<std::string, std::string> parse_config_text(std::string_view text, std::string_view source) {
  std::map<std::string, std::string> out;
  std::istringstream ss{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": expected key=value");
    }
    out[trim(std::string_view(t).substr(0, eq))] = trim(std::string_view(t).substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

RunConfig resolve_run_config(const std::filesystem::path& config_file,
                             const std::map<std::string, std::string>& overrides) {
  RunConfig config;
  if (!config_file.empty()) config.apply(read_config_file(config_file));
  if (const char* root = std::getenv(kOutputRootEnv); root != nullptr && *root != '\0') {
    config.output_root = root;
  }
  config.apply(overrides);
  config.validate();
  return config;
}

}  // namespace dcpcc
