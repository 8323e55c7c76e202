#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dcpcc/autodiff.hpp"
#include "dcpcc/data.hpp"
#include "dcpcc/pcc_head.hpp"

namespace dcpcc {

enum class BackboneKind { dnn, dcnv2 };

struct BackboneConfig {
  BackboneKind kind = BackboneKind::dnn;
  std::vector<std::size_t> hidden = {64, 64};
  std::size_t cross_depth = 2;

  void validate() const;
};

enum class HeadKind { epcf, pcf, linear };

struct ModelConfig {
  BackboneConfig backbone;
  std::size_t embedding_dim = 10;
  // Rows per embedding table; empty for dense (real-vector) input.
  std::vector<std::size_t> table_rows;
  std::size_t dense_dim = 0;
  HeadKind head = HeadKind::epcf;
  double kappa = 0.1;
  std::uint64_t seed = 42;
};

struct DenseLayer {
  Tensor weight;  // (in, out); rows act on row-vector inputs
  Tensor bias;    // (1, out)
};

struct NamedParam {
  std::string name;
  Tensor* tensor;
};

// Plain affine logit layer used by the BCE and hinge baselines.
struct LinearHead {
  Tensor weight;  // (d, 1)
  Tensor bias;    // (1, 1)
};

class Model {
 public:
  explicit Model(const ModelConfig& config);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  Model(Model&&) = default;
  Model& operator=(Model&&) = default;

  [[nodiscard]] const ModelConfig& config() const { return config_; }
  [[nodiscard]] std::size_t input_dim() const { return input_dim_; }
  [[nodiscard]] std::size_t repr_dim() const { return repr_dim_; }
  [[nodiscard]] bool has_conic_head() const { return conic_.has_value(); }

  // Field embeddings concatenated in field order, or the dense features.
  Var embed(Tape& tape, const Dataset& batch);
  Var forward_dnn(Tape& tape, Var x);
  Var forward_dcnv2(Tape& tape, Var x);
  // Representation f consumed by the head, shape (batch, repr_dim).
  Var represent(Tape& tape, const Dataset& batch);
  // Head output before any sigmoid, shape (batch, 1).
  Var score(Tape& tape, Var f);

  [[nodiscard]] PccHead& conic() { return conic_.value(); }
  [[nodiscard]] const PccHead& conic() const { return conic_.value(); }
  [[nodiscard]] std::vector<Tensor>& embeddings() { return embeddings_; }
  [[nodiscard]] std::vector<DenseLayer>& mlp() { return mlp_; }
  [[nodiscard]] std::vector<DenseLayer>& cross() { return cross_; }
  [[nodiscard]] LinearHead& linear() { return linear_.value(); }

  struct Outputs {
    Tensor representation;  // (n, repr_dim)
    std::vector<double> scores;
  };
  // Forward pass over a whole dataset in chunks, without gradients.
  Outputs infer(const Dataset& data, std::size_t chunk = 4096);

  // Parameters updated by the model optimizer (excludes the cone vertex).
  std::vector<NamedParam> parameters();
  // Everything persisted in a checkpoint, including pcc.s when present.
  std::vector<NamedParam> state();
  // Copies values from a checkpoint; names and shapes must match exactly.
  void load_state(const std::map<std::string, Tensor>& blocks);

 private:
  Var forward_mlp(Tape& tape, Var x);

  ModelConfig config_;
  std::size_t input_dim_ = 0;
  std::size_t repr_dim_ = 0;
  std::vector<Tensor> embeddings_;
  std::vector<DenseLayer> cross_;
  std::vector<DenseLayer> mlp_;
  std::optional<PccHead> conic_;
  std::optional<LinearHead> linear_;
};

}  // namespace dcpcc
