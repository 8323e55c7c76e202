#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dcpcc {

// One cell of the published base-vs-PCBCE AUC comparison.
struct PublishedCell {
  std::string_view dataset;
  std::string_view model;
  double base_auc;
  double pcbce_auc;
  double relaimp_percent;
};

std::span<const PublishedCell> published_table(std::string_view id);

struct ReproducedCell {
  PublishedCell published;
  double recomputed_percent;
  [[nodiscard]] bool matches(double tolerance = 0.01) const;
};

// Recomputes every RelaImp cell from the table's AUC columns. Throws
// std::invalid_argument for an unknown id. Known ids: "table2".
std::vector<ReproducedCell> reproduce_table(std::string_view id);
std::string format_reproduction(const std::vector<ReproducedCell>& cells);

}  // namespace dcpcc
