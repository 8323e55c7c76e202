#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace dcpcc {

// Tie-aware Mann-Whitney AUC, (wins + 0.5 ties) / (n+ n-), from one sort and
// average ranks. Throws DataError when only one class is present.
double auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Mean binary cross-entropy with probabilities clamped to [1e-12, 1 - 1e-12].
double logloss(std::span<const double> probabilities, std::span<const std::uint8_t> labels);

// 100 * ((auc_new - 0.5) / (auc_base - 0.5) - 1). Requires auc_base > 0.5.
double relaimp(double auc_new, double auc_base);

struct MetricsReport {
  double auc = 0.0;
  double logloss = 0.0;
  std::size_t n_positives = 0;
  std::size_t n_negatives = 0;
  std::optional<double> relaimp;

  [[nodiscard]] std::string text() const;
  // Single key=value record.
  [[nodiscard]] std::string record() const;
};

MetricsReport make_report(std::span<const double> scores, std::span<const double> probabilities,
                          std::span<const std::uint8_t> labels, std::optional<double> baseline_auc = std::nullopt);

}  // namespace dcpcc
