#include "dcpcc/optim.hpp"

#include <cmath>

#include "dcpcc/errors.hpp"

namespace dcpcc {

Adam::Adam(std::vector<Tensor*> params, AdamConfig config) : params_(std::move(params)), config_(config) {
  if (!(config_.lr >= 0.0) || !(config_.beta1 >= 0.0 && config_.beta1 < 1.0) ||
      !(config_.beta2 >= 0.0 && config_.beta2 < 1.0) || !(config_.eps > 0.0)) {
    throw ConfigError("invalid Adam hyperparameters");
  }
  for (Tensor* p : params_) {
    if (!p->requires_grad()) throw std::invalid_argument("Adam: parameter without gradient slot");
    m_.emplace_back(p->size(), 0.0);
    v_.emplace_back(p->size(), 0.0);
  }
}

void Adam::step() {
  for (Tensor* p : params_) {
    for (double g : p->grad()) {
      if (!std::isfinite(g)) throw NumericError("Adam: non-finite gradient, step aborted");
    }
  }
  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto values = params_[k]->values();
    auto grad = params_[k]->grad();
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      values[i] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps);
    }
  }
}

PlateauScheduler::PlateauScheduler(PlateauConfig config) : config_(config) {
  if (!(config_.factor > 0.0 && config_.factor < 1.0)) throw ConfigError("sched.factor must lie in (0, 1)");
  if (config_.patience == 0) throw ConfigError("sched.patience must be at least 1");
  if (!(config_.min_delta >= 0.0)) throw ConfigError("sched.min_delta must be non-negative");
}

LearningRates PlateauScheduler::step(double metric, LearningRates current) {
  if (!std::isfinite(metric)) throw NumericError("plateau scheduler: non-finite metric");
  last_reduced_ = false;
  last_improved_ = metric > best_ + config_.min_delta;
  if (last_improved_) {
    best_ = metric;
    bad_epochs_ = 0;
    stale_reductions_ = 0;
    return current;
  }
  if (++bad_epochs_ >= config_.patience) {
    bad_epochs_ = 0;
    ++stale_reductions_;
    last_reduced_ = true;
    return {current.model * config_.factor, current.vertex * config_.factor};
  }
  return current;
}

}  // namespace dcpcc
