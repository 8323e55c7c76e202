#include "dcpcc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "dcpcc/errors.hpp"

namespace dcpcc {

double auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("auc: scores and labels differ in length");
  const std::size_t n = scores.size();
  for (double v : scores) {
    if (!std::isfinite(v)) throw NumericError("AUC: non-finite score");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of 1-based average ranks of the positives.
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        pos_rank_sum += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DataError("AUC undefined: input contains a single class");
  const double np = static_cast<double>(n_pos);
  const double u = pos_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

double logloss(std::span<const double> probabilities, std::span<const std::uint8_t> labels) {
  if (probabilities.size() != labels.size()) throw std::invalid_argument("logloss: length mismatch");
  if (probabilities.empty()) throw std::invalid_argument("logloss: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const double p = std::clamp(probabilities[i], 1e-12, 1.0 - 1e-12);
    acc -= labels[i] == 1 ? std::log(p) : std::log(1.0 - p);
  }
  return acc / static_cast<double>(probabilities.size());
}

double relaimp(double auc_new, double auc_base) {
  if (!(auc_base > 0.5)) throw std::invalid_argument("relaimp: baseline AUC must exceed 0.5");
  return 100.0 * ((auc_new - 0.5) / (auc_base - 0.5) - 1.0);
}

std::string MetricsReport::text() const {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(10);
  os << "AUC      " << auc << '\n' << "logloss  " << logloss << '\n';
  os << "samples  " << n_positives + n_negatives << " (" << n_positives << " positive, " << n_negatives
     << " negative)\n";
  if (relaimp) {
    os.precision(2);
    os << "RelaImp  " << (*relaimp >= 0 ? "+" : "") << *relaimp << "%\n";
  }
  return os.str();
}

std::string MetricsReport::record() const {
  std::ostringstream os;
  os.precision(10);
  os << "auc=" << auc << " logloss=" << logloss << " n_pos=" << n_positives << " n_neg=" << n_negatives;
  if (relaimp) {
    os.setf(std::ios::fixed);
    os.precision(2);
    os << " relaimp=" << *relaimp;
  }
  return os.str();
}

MetricsReport make_report(std::span<const double> scores, std::span<const double> probabilities,
                          std::span<const std::uint8_t> labels, std::optional<double> baseline_auc) {
  MetricsReport r;
  r.auc = auc(scores, labels);
  r.logloss = logloss(probabilities, labels);
  r.n_positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
  r.n_negatives = labels.size() - r.n_positives;
  if (baseline_auc) r.relaimp = relaimp(r.auc, *baseline_auc);
  return r;
}

}  // namespace dcpcc
