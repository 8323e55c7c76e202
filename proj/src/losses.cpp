#include "dcpcc/losses.hpp"

#include <cmath>

#include "dcpcc/errors.hpp"

namespace dcpcc {

std::string_view variant_name(LossVariant v) {
  switch (v) {
    case LossVariant::pcbce: return "pcbce";
    case LossVariant::pchinge: return "pchinge";
    case LossVariant::pcbce_l1: return "pcbce-l1";
    case LossVariant::bce: return "bce";
    case LossVariant::hinge: return "hinge";
    case LossVariant::pcbce_eta0: return "pcbce-eta0";
  }
  return "unknown";
}

LossVariant parse_variant(std::string_view name) {
  for (LossVariant v : {LossVariant::pcbce, LossVariant::pchinge, LossVariant::pcbce_l1, LossVariant::bce,
                        LossVariant::hinge, LossVariant::pcbce_eta0}) {
    if (variant_name(v) == name) return v;
  }
  throw ConfigError("unknown loss variant '" + std::string(name) + "'");
}

void LossConfig::validate() const {
  if (!(lambda >= 0.0) || !(eta >= 0.0) || !(kappa >= 0.0)) {
    throw ConfigError("loss.lambda, loss.eta and loss.kappa must be non-negative");
  }
}

ConeVars bind_cone(Tape& tape, PccHead& head) {
  return {tape.parameter(head.w_tilde), tape.parameter(head.gamma_tilde)};
}

namespace {

void check_labels(std::span<const std::uint8_t> labels, const Tensor& scores) {
  if (scores.cols() != 1 || scores.rows() != labels.size()) {
    throw ShapeError("loss: scores of shape " + scores.shape().str() + " for " + std::to_string(labels.size()) +
                     " labels");
  }
  for (std::uint8_t y : labels) {
    if (y > 1) throw DataError("loss: non-binary label " + std::to_string(y));
  }
}

Var reduce(Tape& tape, Var per_sample, Reduction reduction) {
  return reduction == Reduction::mean ? tape.mean(per_sample) : tape.sum(per_sample);
}

}  // namespace

Var bce_term(Tape& tape, Var scores, std::span<const std::uint8_t> labels, Reduction reduction) {
  check_labels(labels, tape.value(scores));
  const std::size_t n = labels.size();
  Tensor y({n, 1});
  Tensor not_y({n, 1});
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = labels[i];
    not_y[i] = 1.0 - labels[i];
  }
  Var p = tape.sigmoid(scores);
  Var log_p = tape.log(p, kProbClamp);
  Var log_not_p = tape.log(tape.sub(tape.constant(Tensor({n, 1}, 1.0)), p), kProbClamp);
  Var ll = tape.add(tape.mul(tape.constant(std::move(y)), log_p), tape.mul(tape.constant(std::move(not_y)), log_not_p));
  return tape.scale(reduce(tape, ll, reduction), -1.0);
}

Var hinge_term(Tape& tape, Var scores, std::span<const std::uint8_t> labels, Reduction reduction) {
  check_labels(labels, tape.value(scores));
  const std::size_t n = labels.size();
  Tensor signed_y({n, 1});
  for (std::size_t i = 0; i < n; ++i) signed_y[i] = labels[i] == 1 ? 1.0 : -1.0;
  Var margin = tape.mul(tape.constant(std::move(signed_y)), scores);
  Var h = tape.max_zero(tape.sub(tape.constant(Tensor({n, 1}, 1.0)), margin));
  return reduce(tape, h, reduction);
}

Var l2_term(Tape& tape, Var w_tilde, double lambda) {
  return tape.scale(tape.sum(tape.square(w_tilde)), lambda / 2.0);
}

Var compactness_term(Tape& tape, const ConeVars& cone, double kappa, double eta) {
  const Tensor& w = tape.value(cone.w_tilde);
  // kappa - (-g~ - |w~|) = kappa + g~ + |w~|; a scalar g~ broadcasts over rows.
  Var arg = tape.add(tape.abs(cone.w_tilde), cone.gamma_tilde);
  arg = tape.add(arg, tape.constant(Tensor(w.shape(), kappa)));
  return tape.scale(tape.sum(tape.max_zero(arg)), eta);
}

Var pcbce_loss(Tape& tape, Var scores, std::span<const std::uint8_t> labels, const ConeVars& cone,
               const LossConfig& config) {
  Var data = bce_term(tape, scores, labels, config.reduction);
  Var reg = tape.add(l2_term(tape, cone.w_tilde, config.lambda),
                     compactness_term(tape, cone, config.kappa, config.effective_eta()));
  return tape.add(data, reg);
}

Var pchinge_loss(Tape& tape, Var scores, std::span<const std::uint8_t> labels, const ConeVars& cone,
                 const LossConfig& config) {
  Var data = hinge_term(tape, scores, labels, config.reduction);
  Var reg = tape.add(l2_term(tape, cone.w_tilde, config.lambda),
                     compactness_term(tape, cone, config.kappa, config.effective_eta()));
  return tape.add(data, reg);
}

Var baseline_loss(Tape& tape, Var logits, std::span<const std::uint8_t> labels, LossVariant variant,
                  Reduction reduction) {
  switch (variant) {
    case LossVariant::bce: return bce_term(tape, logits, labels, reduction);
    case LossVariant::hinge: return hinge_term(tape, logits, labels, reduction);
    default: throw ConfigError("baseline_loss: variant '" + std::string(variant_name(variant)) + "' is not a baseline");
  }
}

Var build_loss(Tape& tape, Var scores, std::span<const std::uint8_t> labels, const std::optional<ConeVars>& cone,
               const LossConfig& config) {
  if (!config.conic()) return baseline_loss(tape, scores, labels, config.variant, config.reduction);
  if (!cone) throw ConfigError("conic loss variant requires a conic head");
  if (config.variant == LossVariant::pchinge) return pchinge_loss(tape, scores, labels, *cone, config);
  return pcbce_loss(tape, scores, labels, *cone, config);
}

double center_loss(const Tensor& positives, std::span<const double> s) {
  if (positives.rows() == 0) return 0.0;
  if (positives.cols() != s.size()) throw ShapeError("center_loss: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < positives.rows(); ++i) {
    for (std::size_t m = 0; m < s.size(); ++m) {
      const double d = positives(i, m) - s[m];
      acc += d * d;
    }
  }
  return acc / static_cast<double>(positives.rows());
}

Var center_loss(Tape& tape, Var positives, Var s) {
  const double n = static_cast<double>(tape.value(positives).rows());
  return tape.scale(tape.sum(tape.square(tape.sub(positives, s))), 1.0 / n);
}

Tensor positive_rows(const Tensor& f, std::span<const std::uint8_t> labels) {
  if (f.rows() != labels.size()) throw ShapeError("positive_rows: label count mismatch");
  std::vector<double> values;
  std::size_t n = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1) continue;
    values.insert(values.end(), f.values().begin() + static_cast<std::ptrdiff_t>(i * f.cols()),
                  f.values().begin() + static_cast<std::ptrdiff_t>((i + 1) * f.cols()));
    ++n;
  }
  return Tensor({n, f.cols()}, std::move(values));
}

VertexTracker::VertexTracker(Tensor& vertex, double learning_rate) : vertex_(&vertex), lr_(learning_rate) {
  if (!(learning_rate > 0.0)) throw ConfigError("vertex learning rate must be positive");
}

std::size_t VertexTracker::update(const Tensor& f, std::span<const std::uint8_t> labels) {
  return update_positives(positive_rows(f, labels));
}

std::size_t VertexTracker::update_positives(const Tensor& positives) {
  const std::size_t n = positives.rows();
  if (n == 0) return 0;
  auto s = vertex_->values();
  if (positives.cols() != s.size()) throw ShapeError("update_vertex: dimension mismatch");
  std::vector<double> pull(s.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = 0; m < s.size(); ++m) pull[m] += positives(i, m) - s[m];
  }
  const double step = lr_ * 2.0 / static_cast<double>(n);
  for (std::size_t m = 0; m < s.size(); ++m) {
    s[m] += step * pull[m];
    if (!std::isfinite(s[m])) throw NumericError("update_vertex: non-finite cone vertex");
  }
  positives_seen_ += n;
  return n;
}

}  // namespace dcpcc
