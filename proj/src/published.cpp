#include "dcpcc/published.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "dcpcc/metrics.hpp"

namespace dcpcc {

namespace {

constexpr std::array<PublishedCell, 16> kTable2 = {{
    {"Avazu", "DNN", 0.76330, 0.76464, 0.51},
    {"Avazu", "DCNv2", 0.76364, 0.76558, 0.74},
    {"Avazu", "AutoInt", 0.76237, 0.76255, 0.07},
    {"Avazu", "MaskNet", 0.76429, 0.76427, -0.01},
    {"Criteo", "DNN", 0.81368, 0.81379, 0.04},
    {"Criteo", "DCNv2", 0.81394, 0.81429, 0.11},
    {"Criteo", "AutoInt", 0.81259, 0.81165, -0.30},
    {"Criteo", "MaskNet", 0.81391, 0.81353, -0.12},
    {"MovieLens", "DNN", 0.96768, 0.96960, 0.41},
    {"MovieLens", "DCNv2", 0.96866, 0.97081, 0.46},
    {"MovieLens", "AutoInt", 0.96629, 0.96743, 0.24},
    {"MovieLens", "MaskNet", 0.96720, 0.96872, 0.33},
    {"Frappe", "DNN", 0.98405, 0.98563, 0.33},
    {"Frappe", "DCNv2", 0.98382, 0.98503, 0.25},
    {"Frappe", "AutoInt", 0.98309, 0.98567, 0.54},
    {"Frappe", "MaskNet", 0.98368, 0.98437, 0.14},
}};

}  // namespace

std::span<const PublishedCell> published_table(std::string_view id) {
  if (id == "table2") return kTable2;
  throw std::invalid_argument("unknown table id '" + std::string(id) + "' (known: table2)");
}

bool ReproducedCell::matches(double tolerance) const {
  return std::abs(recomputed_percent - published.relaimp_percent) <= tolerance + 1e-9;
}

std::vector<ReproducedCell> reproduce_table(std::string_view id) {
  std::vector<ReproducedCell> out;
  for (const auto& cell : published_table(id)) out.push_back({cell, relaimp(cell.pcbce_auc, cell.base_auc)});
  return out;
}

std::string format_reproduction(const std::vector<ReproducedCell>& cells) {
  std::string out = "dataset    model     base     pcbce    relaimp  published  match\n";
  char buf[160];
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof(buf), "%-10s %-8s %.5f  %.5f  %+6.2f%%  %+6.2f%%    %s\n",
                  std::string(c.published.dataset).c_str(), std::string(c.published.model).c_str(),
                  c.published.base_auc, c.published.pcbce_auc, c.recomputed_percent, c.published.relaimp_percent,
                  c.matches() ? "yes" : "NO");
    out += buf;
  }
  return out;
}

}  // namespace dcpcc
