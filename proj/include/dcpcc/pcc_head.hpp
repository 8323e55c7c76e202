#pragma once

// Polyhedral conic classification head in SVM sign convention:
//
//   score(f) = w~ . (f - s) + g~ . |f - s| + b          (EPCF, vector g~)
//   score(f) = w~ . (f - s) + g~ * ||f - s||_1 + b      (PCF, scalar g~)
//
// with w~ = -w, g~ = -gamma relative to the classical cone function, so a
// positive score (classical f(x) < 0) means the sample is accepted.

#include <random>
#include <span>
#include <vector>

#include "dcpcc/autodiff.hpp"

namespace dcpcc {

enum class ConeKind { epcf, pcf };

struct ConeHeadParams {
  ConeKind kind = ConeKind::epcf;
  std::vector<double> w_tilde;
  // Length d for EPCF, length 1 for PCF.
  std::vector<double> gamma_tilde;
  double b = 1.0;
  std::vector<double> s;

  [[nodiscard]] std::size_t dim() const { return w_tilde.size(); }
  [[nodiscard]] double gamma(std::size_t m) const {
    return kind == ConeKind::pcf ? gamma_tilde.at(0) : gamma_tilde.at(m);
  }
  // Per-dimension gammas, with the PCF scalar broadcast.
  [[nodiscard]] std::vector<double> expanded_gamma() const;
  // Throws ShapeError on inconsistent lengths.
  void validate() const;
};

// Scores for each row of f (batch x d).
std::vector<double> score_epcf(const Tensor& f, const ConeHeadParams& params);
std::vector<double> score_pcf(const Tensor& f, const ConeHeadParams& params);
// Score of a single point; dispatches on params.kind.
double score_point(std::span<const double> x, const ConeHeadParams& params);

// Classical (untransformed) cone function value, w = -w~, gamma = -g~.
// Negative values lie in the positive acceptance region.
double classical_value(std::span<const double> x, const ConeHeadParams& params);

double sigmoid(double z);
std::vector<double> predict_proba(std::span<const double> scores);

// slack_m = (-g~_m - |w~_m|) - kappa. All slacks >= 0 together with b > 0
// certify a bounded acceptance region.
std::vector<double> constraint_slack(const ConeHeadParams& params, double kappa);

// Learnable head owned by a model. s is tracked separately and never
// receives gradients.
class PccHead {
 public:
  PccHead() = default;
  // w~ ~ U(-0.01, 0.01), g~ = -(kappa + 0.5), b = 1, s = 0.
  PccHead(std::size_t dim, ConeKind kind, double kappa, std::mt19937_64& rng);

  [[nodiscard]] std::size_t dim() const { return w_tilde.rows(); }
  [[nodiscard]] ConeKind kind() const { return kind_; }

  // Scores, shape (batch, 1).
  Var score(Tape& tape, Var f);

  [[nodiscard]] ConeHeadParams params() const;

  Tensor w_tilde;      // (d, 1)
  Tensor gamma_tilde;  // (d, 1) or (1, 1)
  Tensor b;            // (1, 1)
  Tensor s;            // (1, d)

 private:
  ConeKind kind_ = ConeKind::epcf;
};

}  // namespace dcpcc
