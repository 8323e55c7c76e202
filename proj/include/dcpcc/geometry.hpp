#pragma once

// Geometry of the conic acceptance region {f : score(f) > 0}.
//
// Inside each orthant around s the score is affine, so the region is a union
// of simplices with one vertex at s and the others on the coordinate axes.
// Boundedness is certified by the sufficient condition b > 0 and
// -g~_m - |w~_m| >= kappa for every m.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dcpcc/data.hpp"
#include "dcpcc/models.hpp"
#include "dcpcc/pcc_head.hpp"

namespace dcpcc {

struct Certificate {
  bool certified = false;
  double min_slack = 0.0;
  std::size_t tightest_dim = 0;
  std::vector<double> slacks;
  double b = 0.0;
};

// Certified iff b > 0, every slack is >= 0, and every margin -g~_m - |w~_m|
// is strictly positive (only binding when kappa == 0).
Certificate certify_bounded(const ConeHeadParams& params, double kappa);

struct Crossing {
  bool bounded = false;
  double t_star = 0.0;
};

inline constexpr double kCrossingTolerance = 1e-10;
inline constexpr double kMaxRayLength = 1e6;

// Smallest t > 0 with score(s + t d) <= 0, by doubling then bisection until
// |score| < 1e-10. Returns t = 0 when the vertex itself is rejected (b <= 0)
// and bounded = false when no sign change occurs for t <= 1e6.
Crossing boundary_crossing(const ConeHeadParams& params, std::span<const double> direction);

struct RegionProbeConfig {
  std::size_t n_directions = 1000;
  std::size_t n_volume_samples = 100000;
  // Box half-width around s; unset means 1.1 x the largest axis crossing.
  std::optional<double> halfwidth;
  std::uint64_t seed = 1;
};

struct VolumeEstimate {
  double volume = 0.0;
  double standard_error = 0.0;
  double halfwidth = 0.0;
  std::size_t hits = 0;
  std::size_t samples = 0;
};

// Uniform sampling in the box s +/- halfwidth. Throws std::domain_error for
// an uncertified region or when no sample lands inside.
VolumeEstimate mc_volume(const ConeHeadParams& params, const RegionProbeConfig& config);

// Closed-form log-volume of a certified region:
//   log( b^d / d! * prod_m [1/(a_m - w~_m) + 1/(a_m + w~_m)] ),  a_m = -g~_m.
// nullopt when the region is not certified.
std::optional<double> exact_log_volume(const ConeHeadParams& params);

struct DirectionProbe {
  std::vector<double> direction;
  Crossing crossing;
};

// Uniformly random unit directions (seeded) and their boundary crossings.
std::vector<DirectionProbe> probe_directions(const ConeHeadParams& params, std::size_t n, std::uint64_t seed);

struct VolumePoint {
  double b = 0.0;
  std::optional<double> log_volume;
  std::optional<VolumeEstimate> monte_carlo;
};

// Volume against offset b with everything else fixed. Monte Carlo estimates
// are included only up to `max_mc_dim` dimensions.
std::vector<VolumePoint> volume_sweep(const ConeHeadParams& params, std::span<const double> offsets,
                                      const RegionProbeConfig& config, std::size_t max_mc_dim = 6);

struct RegionReport {
  Certificate certificate;
  std::size_t n_positives = 0;
  std::size_t n_negatives = 0;
  // Fractions with score > 0; unset when the class is absent.
  std::optional<double> positive_inside;
  std::optional<double> negative_inside;
};

RegionReport region_report(Model& model, const Dataset& data, double kappa);

}  // namespace dcpcc
