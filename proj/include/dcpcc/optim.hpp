#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "dcpcc/autodiff.hpp"

namespace dcpcc {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam over a fixed set of parameter tensors, reading each
// tensor's grad slot.
class Adam {
 public:
  Adam(std::vector<Tensor*> params, AdamConfig config);

  // Throws NumericError, without touching any parameter, if a gradient is
  // non-finite.
  void step();

  [[nodiscard]] double lr() const { return config_.lr; }
  void set_lr(double lr) { config_.lr = lr; }
  [[nodiscard]] std::uint64_t step_count() const { return t_; }
  [[nodiscard]] const AdamConfig& config() const { return config_; }

 private:
  std::vector<Tensor*> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  AdamConfig config_;
  std::uint64_t t_ = 0;
};

struct PlateauConfig {
  double factor = 0.1;
  std::size_t patience = 1;
  double min_delta = 1e-6;
};

struct LearningRates {
  double model = 0.0;
  double vertex = 0.0;
};

// Reduce-on-plateau for a maximized metric (validation AUC). After
// `patience` consecutive epochs without improving on best + min_delta, every
// learning rate is multiplied by `factor` and the counter restarts.
class PlateauScheduler {
 public:
  explicit PlateauScheduler(PlateauConfig config);

  LearningRates step(double metric, LearningRates current);

  [[nodiscard]] double best() const { return best_; }
  [[nodiscard]] std::size_t bad_epochs() const { return bad_epochs_; }
  [[nodiscard]] bool last_improved() const { return last_improved_; }
  [[nodiscard]] bool last_reduced() const { return last_reduced_; }
  // Reductions since the metric last improved.
  [[nodiscard]] std::size_t reductions_without_improvement() const { return stale_reductions_; }

 private:
  PlateauConfig config_;
  double best_ = -std::numeric_limits<double>::infinity();
  std::size_t bad_epochs_ = 0;
  std::size_t stale_reductions_ = 0;
  bool last_improved_ = false;
  bool last_reduced_ = false;
};

}  // namespace dcpcc
