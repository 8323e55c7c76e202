#include "dcpcc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "dcpcc/errors.hpp"

namespace dcpcc {

Certificate certify_bounded(const ConeHeadParams& params, double kappa) {
  params.validate();
  Certificate c;
  c.b = params.b;
  c.slacks = constraint_slack(params, kappa);
  const auto it = std::min_element(c.slacks.begin(), c.slacks.end());
  c.min_slack = *it;
  c.tightest_dim = static_cast<std::size_t>(it - c.slacks.begin());
  c.certified = params.b > 0.0 && c.min_slack >= 0.0 && c.min_slack + kappa > 0.0;
  return c;
}

Crossing boundary_crossing(const ConeHeadParams& params, std::span<const double> direction) {
  params.validate();
  if (direction.size() != params.dim()) throw ShapeError("boundary_crossing: direction dimension mismatch");
  double l1 = 0.0;
  for (double v : direction) l1 += std::abs(v);
  if (!(l1 > 0.0)) throw std::invalid_argument("boundary_crossing: zero direction");

  std::vector<double> point(params.dim());
  auto score_at = [&](double t) {
    for (std::size_t m = 0; m < point.size(); ++m) point[m] = params.s[m] + t * direction[m];
    return score_point(point, params);
  };

  if (score_at(0.0) <= 0.0) return {true, 0.0};
  double lo = 0.0;
  double hi = 1.0 / l1;
  while (score_at(hi) > 0.0) {
    if (hi >= kMaxRayLength) return {false, kMaxRayLength};
    lo = hi;
    hi = std::min(2.0 * hi, kMaxRayLength);
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double v = score_at(mid);
    if (std::abs(v) < kCrossingTolerance) return {true, mid};
    if (v > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-16 * hi) break;
  }
  return {true, hi};
}

VolumeEstimate mc_volume(const ConeHeadParams& params, const RegionProbeConfig& config) {
  if (!certify_bounded(params, 0.0).certified) {
    throw std::domain_error("mc_volume: region is not certified bounded");
  }
  if (config.n_volume_samples == 0) throw std::invalid_argument("mc_volume: need at least one sample");
  const std::size_t d = params.dim();
  double h = 0.0;
  if (config.halfwidth) {
    h = *config.halfwidth;
    if (!(h > 0.0)) throw std::invalid_argument("mc_volume: halfwidth must be positive");
  } else {
    std::vector<double> axis(d, 0.0);
    for (std::size_t m = 0; m < d; ++m) {
      for (double sign : {1.0, -1.0}) {
        axis[m] = sign;
        h = std::max(h, boundary_crossing(params, axis).t_star);
      }
      axis[m] = 0.0;
    }
    h *= 1.1;
  }

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> x(d);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < config.n_volume_samples; ++i) {
    for (std::size_t m = 0; m < d; ++m) x[m] = params.s[m] + h * unit(rng);
    if (score_point(x, params) > 0.0) ++hits;
  }
  if (hits == 0) throw std::domain_error("mc_volume: no sample landed inside the region");
  const double n = static_cast<double>(config.n_volume_samples);
  const double frac = static_cast<double>(hits) / n;
  const double box = std::pow(2.0 * h, static_cast<double>(d));
  return {box * frac, box * std::sqrt(frac * (1.0 - frac) / n), h, hits, config.n_volume_samples};
}

std::optional<double> exact_log_volume(const ConeHeadParams& params) {
  if (!certify_bounded(params, 0.0).certified) return std::nullopt;
  const std::size_t d = params.dim();
  double logv = static_cast<double>(d) * std::log(params.b) - std::lgamma(static_cast<double>(d) + 1.0);
  for (std::size_t m = 0; m < d; ++m) {
    const double a = -params.gamma(m);
    const double w = params.w_tilde[m];
    logv += std::log(1.0 / (a - w) + 1.0 / (a + w));
  }
  return logv;
}

std::vector<DirectionProbe> probe_directions(const ConeHeadParams& params, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<DirectionProbe> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> dir(params.dim());
    double norm = 0.0;
    while (norm < 1e-12) {
      norm = 0.0;
      for (double& v : dir) {
        v = normal(rng);
        norm += v * v;
      }
    }
    norm = std::sqrt(norm);
    for (double& v : dir) v /= norm;
    Crossing c = boundary_crossing(params, dir);
    out.push_back({std::move(dir), c});
  }
  return out;
}

std::vector<VolumePoint> volume_sweep(const ConeHeadParams& params, std::span<const double> offsets,
                                      const RegionProbeConfig& config, std::size_t max_mc_dim) {
  std::vector<VolumePoint> out;
  ConeHeadParams p = params;
  for (double b : offsets) {
    p.b = b;
    VolumePoint pt;
    pt.b = b;
    pt.log_volume = exact_log_volume(p);
    if (pt.log_volume && p.dim() <= max_mc_dim) {
      try {
        pt.monte_carlo = mc_volume(p, config);
      } catch (const std::domain_error&) {
      }
    }
    out.push_back(std::move(pt));
  }
  return out;
}

RegionReport region_report(Model& model, const Dataset& data, double kappa) {
  if (!model.has_conic_head()) throw ConfigError("region report requires a conic head");
  RegionReport r;
  r.certificate = certify_bounded(model.conic().params(), kappa);
  const auto out = model.infer(data);
  std::size_t pos_in = 0;
  std::size_t neg_in = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const bool inside = out.scores[i] > 0.0;
    if (data.labels[i] == 1) {
      ++r.n_positives;
      pos_in += inside;
    } else {
      ++r.n_negatives;
      neg_in += inside;
    }
  }
  if (r.n_positives > 0) r.positive_inside = static_cast<double>(pos_in) / static_cast<double>(r.n_positives);
  if (r.n_negatives > 0) r.negative_inside = static_cast<double>(neg_in) / static_cast<double>(r.n_negatives);
  return r;
}

}  // namespace dcpcc
