#include "dcpcc/pcc_head.hpp"

#include <cmath>

#include "dcpcc/errors.hpp"

namespace dcpcc {

std::vector<double> ConeHeadParams::expanded_gamma() const {
  std::vector<double> g(dim());
  for (std::size_t m = 0; m < g.size(); ++m) g[m] = gamma(m);
  return g;
}

void ConeHeadParams::validate() const {
  const std::size_t d = dim();
  const std::size_t want_gamma = kind == ConeKind::pcf ? 1 : d;
  if (d == 0 || s.size() != d || gamma_tilde.size() != want_gamma) {
    throw ShapeError("cone head: inconsistent parameter lengths (w~ " + std::to_string(d) + ", g~ " +
                     std::to_string(gamma_tilde.size()) + ", s " + std::to_string(s.size()) + ")");
  }
}

namespace {

std::vector<double> score_rows(const Tensor& f, const ConeHeadParams& params) {
  params.validate();
  if (f.cols() != params.dim()) {
    throw ShapeError("cone head: representation has " + std::to_string(f.cols()) + " columns, head expects " +
                     std::to_string(params.dim()));
  }
  std::vector<double> out(f.rows());
  for (std::size_t i = 0; i < f.rows(); ++i) out[i] = score_point(f.values().subspan(i * f.cols(), f.cols()), params);
  return out;
}

}  // namespace

std::vector<double> score_epcf(const Tensor& f, const ConeHeadParams& params) {
  if (params.kind != ConeKind::epcf) throw ShapeError("score_epcf: head has scalar gamma");
  return score_rows(f, params);
}

std::vector<double> score_pcf(const Tensor& f, const ConeHeadParams& params) {
  if (params.kind != ConeKind::pcf) throw ShapeError("score_pcf: head has vector gamma");
  return score_rows(f, params);
}

double score_point(std::span<const double> x, const ConeHeadParams& params) {
  if (x.size() != params.dim()) throw ShapeError("score_point: dimension mismatch");
  double lin = 0.0;
  double cone = 0.0;
  double l1 = 0.0;
  for (std::size_t m = 0; m < x.size(); ++m) {
    const double diff = x[m] - params.s[m];
    lin += params.w_tilde[m] * diff;
    if (params.kind == ConeKind::epcf) {
      cone += params.gamma_tilde[m] * std::abs(diff);
    } else {
      l1 += std::abs(diff);
    }
  }
  if (params.kind == ConeKind::pcf) cone = params.gamma_tilde[0] * l1;
  return lin + cone + params.b;
}

double classical_value(std::span<const double> x, const ConeHeadParams& params) {
  double value = -params.b;
  for (std::size_t m = 0; m < x.size(); ++m) {
    const double w = -params.w_tilde[m];
    const double gamma = -params.gamma(m);
    const double diff = x[m] - params.s[m];
    value += w * diff + gamma * std::abs(diff);
  }
  return value;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::vector<double> predict_proba(std::span<const double> scores) {
  std::vector<double> p(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) p[i] = sigmoid(scores[i]);
  return p;
}

std::vector<double> constraint_slack(const ConeHeadParams& params, double kappa) {
  std::vector<double> slack(params.dim());
  for (std::size_t m = 0; m < slack.size(); ++m) {
    slack[m] = (-params.gamma(m) - std::abs(params.w_tilde[m])) - kappa;
  }
  return slack;
}

PccHead::PccHead(std::size_t dim, ConeKind kind, double kappa, std::mt19937_64& rng)
    : w_tilde({dim, 1}),
      gamma_tilde(kind == ConeKind::pcf ? Shape{1, 1} : Shape{dim, 1}, -(kappa + 0.5)),
      b({1, 1}, 1.0),
      s({1, dim}, 0.0),
      kind_(kind) {
  std::uniform_real_distribution<double> init(-0.01, 0.01);
  for (double& v : w_tilde.values()) v = init(rng);
  w_tilde.set_requires_grad(true);
  gamma_tilde.set_requires_grad(true);
  b.set_requires_grad(true);
}

Var PccHead::score(Tape& tape, Var f) {
  const std::size_t d = dim();
  Var diff = tape.sub(f, tape.constant(s));
  Var lin = tape.matmul(diff, tape.parameter(w_tilde));
  Var mag = tape.abs(diff);
  Var cone;
  if (kind_ == ConeKind::epcf) {
    cone = tape.matmul(mag, tape.parameter(gamma_tilde));
  } else {
    Var l1 = tape.matmul(mag, tape.constant(Tensor({d, 1}, 1.0)));
    cone = tape.matmul(l1, tape.parameter(gamma_tilde));
  }
  return tape.add(tape.add(lin, cone), tape.parameter(b));
}

ConeHeadParams PccHead::params() const {
  ConeHeadParams p;
  p.kind = kind_;
  p.w_tilde.assign(w_tilde.values().begin(), w_tilde.values().end());
  p.gamma_tilde.assign(gamma_tilde.values().begin(), gamma_tilde.values().end());
  p.b = b.item();
  p.s.assign(s.values().begin(), s.values().end());
  return p;
}

}  // namespace dcpcc
