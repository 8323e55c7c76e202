#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dcpcc/autodiff.hpp"
#include "dcpcc/pcc_head.hpp"

namespace dcpcc {

enum class LossVariant { pcbce, pchinge, pcbce_l1, bce, hinge, pcbce_eta0 };

std::string_view variant_name(LossVariant v);
LossVariant parse_variant(std::string_view name);

// How the per-sample data term is reduced over a batch. The L2 and
// compactness terms are added once per batch in either mode.
enum class Reduction { mean, sum };

inline constexpr double kProbClamp = 1e-12;

struct LossConfig {
  LossVariant variant = LossVariant::pcbce;
  double lambda = 0.0;
  double eta = 0.01;
  double kappa = 0.1;
  Reduction reduction = Reduction::mean;

  [[nodiscard]] bool conic() const { return variant != LossVariant::bce && variant != LossVariant::hinge; }
  [[nodiscard]] bool scalar_gamma() const { return variant == LossVariant::pcbce_l1; }
  [[nodiscard]] double effective_eta() const { return variant == LossVariant::pcbce_eta0 ? 0.0 : eta; }
  void validate() const;
};

// Head parameters as bound on a tape.
struct ConeVars {
  Var w_tilde;      // (d, 1)
  Var gamma_tilde;  // (d, 1) or (1, 1)
};

ConeVars bind_cone(Tape& tape, PccHead& head);

// -[y log p + (1-y) log(1-p)] with p = sigmoid(score) clamped to
// [1e-12, 1 - 1e-12]. Labels in {0, 1}.
Var bce_term(Tape& tape, Var scores, std::span<const std::uint8_t> labels, Reduction reduction);
// max(0, 1 - y * score) with {0,1} labels mapped to {-1,+1}.
Var hinge_term(Tape& tape, Var scores, std::span<const std::uint8_t> labels, Reduction reduction);
// (lambda / 2) ||w~||^2
Var l2_term(Tape& tape, Var w_tilde, double lambda);
// eta * sum_m max(0, kappa - (-g~_m - |w~_m|))
Var compactness_term(Tape& tape, const ConeVars& cone, double kappa, double eta);

Var pcbce_loss(Tape& tape, Var scores, std::span<const std::uint8_t> labels, const ConeVars& cone,
               const LossConfig& config);
Var pchinge_loss(Tape& tape, Var scores, std::span<const std::uint8_t> labels, const ConeVars& cone,
                 const LossConfig& config);
// BCE or hinge on plain logits.
Var baseline_loss(Tape& tape, Var logits, std::span<const std::uint8_t> labels, LossVariant variant,
                  Reduction reduction = Reduction::mean);
// Dispatches on config.variant. `cone` is required for the conic variants.
Var build_loss(Tape& tape, Var scores, std::span<const std::uint8_t> labels, const std::optional<ConeVars>& cone,
               const LossConfig& config);

// Mean squared distance (1/n+) sum ||f+_i - s||^2 from positive rows to s.
double center_loss(const Tensor& positives, std::span<const double> s);
Var center_loss(Tape& tape, Var positives, Var s);

// Rows of f whose label is 1.
Tensor positive_rows(const Tensor& f, std::span<const std::uint8_t> labels);

// SGD on the center loss w.r.t. the cone vertex only. The representations it
// sees are plain values, detached from any tape.
class VertexTracker {
 public:
  VertexTracker(Tensor& vertex, double learning_rate);

  // s <- s + lr * (2 / n+) * sum(f+ - s). A batch without positives leaves s
  // and the counter untouched. Returns the number of positives used.
  std::size_t update(const Tensor& f, std::span<const std::uint8_t> labels);
  std::size_t update_positives(const Tensor& positives);

  [[nodiscard]] double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }
  [[nodiscard]] std::size_t positives_seen() const { return positives_seen_; }
  [[nodiscard]] std::span<const double> vertex() const { return vertex_->values(); }

 private:
  Tensor* vertex_;
  double lr_;
  std::size_t positives_seen_ = 0;
};

}  // namespace dcpcc
