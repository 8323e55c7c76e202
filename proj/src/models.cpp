#include "dcpcc/models.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dcpcc/errors.hpp"

namespace dcpcc {

void BackboneConfig::validate() const {
  if (kind == BackboneKind::dnn && hidden.empty()) throw ConfigError("dnn backbone needs at least one hidden layer");
  if (kind == BackboneKind::dcnv2 && cross_depth < 1) throw ConfigError("dcnv2 backbone needs cross depth >= 1");
  for (std::size_t h : hidden) {
    if (h == 0) throw ConfigError("hidden layer sizes must be positive");
  }
}

namespace {

// He-uniform weights, zero bias.
DenseLayer make_dense(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  DenseLayer layer{Tensor({in, out}), Tensor({1, out}, 0.0)};
  const double limit = std::sqrt(6.0 / static_cast<double>(in));
  std::uniform_real_distribution<double> init(-limit, limit);
  for (double& v : layer.weight.values()) v = init(rng);
  layer.weight.set_requires_grad(true);
  layer.bias.set_requires_grad(true);
  return layer;
}

}  // namespace

Model::Model(const ModelConfig& config) : config_(config) {
  config_.backbone.validate();
  std::mt19937_64 rng(config_.seed);
  if (!config_.table_rows.empty()) {
    if (config_.embedding_dim == 0) throw ConfigError("embedding dimension must be positive");
    std::uniform_real_distribution<double> init(-0.01, 0.01);
    for (std::size_t rows : config_.table_rows) {
      Tensor table({rows, config_.embedding_dim});
      for (double& v : table.values()) v = init(rng);
      table.set_requires_grad(true);
      embeddings_.push_back(std::move(table));
    }
    input_dim_ = config_.table_rows.size() * config_.embedding_dim;
  } else {
    if (config_.dense_dim == 0) throw ConfigError("model needs embedding tables or a dense input dimension");
    input_dim_ = config_.dense_dim;
  }

  std::size_t width = input_dim_;
  if (config_.backbone.kind == BackboneKind::dcnv2) {
    for (std::size_t l = 0; l < config_.backbone.cross_depth; ++l) cross_.push_back(make_dense(width, width, rng));
  }
  for (std::size_t h : config_.backbone.hidden) {
    mlp_.push_back(make_dense(width, h, rng));
    width = h;
  }
  repr_dim_ = width;

  if (config_.head == HeadKind::linear) {
    LinearHead head{Tensor({repr_dim_, 1}), Tensor({1, 1}, 0.0)};
    const double limit = 1.0 / std::sqrt(static_cast<double>(repr_dim_));
    std::uniform_real_distribution<double> init(-limit, limit);
    for (double& v : head.weight.values()) v = init(rng);
    head.weight.set_requires_grad(true);
    head.bias.set_requires_grad(true);
    linear_ = std::move(head);
  } else {
    conic_.emplace(repr_dim_, config_.head == HeadKind::pcf ? ConeKind::pcf : ConeKind::epcf, config_.kappa, rng);
  }
}

Var Model::embed(Tape& tape, const Dataset& batch) {
  if (embeddings_.empty()) {
    if (batch.categorical() || batch.dense_dim != input_dim_) {
      throw ShapeError("dense model expects " + std::to_string(input_dim_) + " input features, batch has " +
                       std::to_string(batch.dense_dim));
    }
    return tape.constant(Tensor({batch.size(), batch.dense_dim}, batch.dense));
  }
  if (batch.n_fields != embeddings_.size()) {
    throw ShapeError("batch has " + std::to_string(batch.n_fields) + " fields, model has " +
                     std::to_string(embeddings_.size()) + " embedding tables");
  }
  std::vector<Var> parts;
  std::vector<std::uint32_t> column(batch.size());
  for (std::size_t f = 0; f < embeddings_.size(); ++f) {
    for (std::size_t i = 0; i < batch.size(); ++i) column[i] = batch.indices[i * batch.n_fields + f];
    parts.push_back(tape.gather_rows(tape.parameter(embeddings_[f]), column));
  }
  return parts.size() == 1 ? parts.front() : tape.concat(parts);
}

Var Model::forward_mlp(Tape& tape, Var x) {
  for (auto& layer : mlp_) {
    x = tape.relu(tape.add(tape.matmul(x, tape.parameter(layer.weight)), tape.parameter(layer.bias)));
  }
  return x;
}

Var Model::forward_dnn(Tape& tape, Var x) { return forward_mlp(tape, x); }

Var Model::forward_dcnv2(Tape& tape, Var x) {
  const Var x0 = x;
  for (auto& layer : cross_) {
    Var t = tape.add(tape.matmul(x, tape.parameter(layer.weight)), tape.parameter(layer.bias));
    x = tape.add(tape.mul(x0, t), x);
  }
  return forward_mlp(tape, x);
}

Var Model::represent(Tape& tape, const Dataset& batch) {
  Var x = embed(tape, batch);
  return config_.backbone.kind == BackboneKind::dnn ? forward_dnn(tape, x) : forward_dcnv2(tape, x);
}

Var Model::score(Tape& tape, Var f) {
  if (tape.value(f).cols() != repr_dim_) {
    throw ShapeError("representation width " + std::to_string(tape.value(f).cols()) + " does not match head width " +
                     std::to_string(repr_dim_));
  }
  if (conic_) return conic_->score(tape, f);
  return tape.add(tape.matmul(f, tape.parameter(linear_->weight)), tape.parameter(linear_->bias));
}

Model::Outputs Model::infer(const Dataset& data, std::size_t chunk) {
  Outputs out;
  out.representation = Tensor({data.size(), repr_dim_});
  out.scores.reserve(data.size());
  for (std::size_t begin = 0; begin < data.size(); begin += chunk) {
    const std::size_t end = std::min(data.size(), begin + chunk);
    const Dataset batch = data.slice(begin, end);
    Tape tape;
    Var f = represent(tape, batch);
    Var s = score(tape, f);
    const auto fv = tape.value(f).values();
    std::copy(fv.begin(), fv.end(), out.representation.values().begin() + static_cast<std::ptrdiff_t>(begin * repr_dim_));
    const auto sv = tape.value(s).values();
    out.scores.insert(out.scores.end(), sv.begin(), sv.end());
  }
  return out;
}

std::vector<NamedParam> Model::parameters() {
  std::vector<NamedParam> out;
  for (std::size_t f = 0; f < embeddings_.size(); ++f) out.push_back({"embedding." + std::to_string(f), &embeddings_[f]});
  for (std::size_t l = 0; l < cross_.size(); ++l) {
    out.push_back({"cross." + std::to_string(l) + ".weight", &cross_[l].weight});
    out.push_back({"cross." + std::to_string(l) + ".bias", &cross_[l].bias});
  }
  for (std::size_t l = 0; l < mlp_.size(); ++l) {
    out.push_back({"dnn." + std::to_string(l) + ".weight", &mlp_[l].weight});
    out.push_back({"dnn." + std::to_string(l) + ".bias", &mlp_[l].bias});
  }
  if (conic_) {
    out.push_back({"pcc.w_tilde", &conic_->w_tilde});
    out.push_back({"pcc.gamma_tilde", &conic_->gamma_tilde});
    out.push_back({"pcc.b", &conic_->b});
  } else {
    out.push_back({"linear.weight", &linear_->weight});
    out.push_back({"linear.bias", &linear_->bias});
  }
  return out;
}

std::vector<NamedParam> Model::state() {
  auto out = parameters();
  if (conic_) out.push_back({"pcc.s", &conic_->s});
  return out;
}

void Model::load_state(const std::map<std::string, Tensor>& blocks) {
  auto params = state();
  if (blocks.size() != params.size()) {
    throw DataError("checkpoint has " + std::to_string(blocks.size()) + " blocks, model expects " +
                    std::to_string(params.size()));
  }
  for (auto& p : params) {
    auto it = blocks.find(p.name);
    if (it == blocks.end()) throw DataError("checkpoint is missing block '" + p.name + "'");
    if (it->second.shape() != p.tensor->shape()) {
      throw DataError("checkpoint block '" + p.name + "' has shape " + it->second.shape().str() + ", model expects " +
                      p.tensor->shape().str());
    }
    std::copy(it->second.values().begin(), it->second.values().end(), p.tensor->values().begin());
  }
}

}  // namespace dcpcc
