#include <doctest.h>

#include <cmath>
#include <random>

#include "dcpcc/geometry.hpp"

using namespace dcpcc;

namespace {

ConeHeadParams params2(std::vector<double> w, std::vector<double> g, double b) {
  ConeHeadParams p;
  p.w_tilde = std::move(w);
  p.gamma_tilde = std::move(g);
  p.b = b;
  p.s.assign(p.w_tilde.size(), 0.0);
  return p;
}

ConeHeadParams random_certified(std::mt19937_64& rng, std::size_t d, double kappa) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ConeHeadParams p;
  for (std::size_t m = 0; m < d; ++m) {
    const double w = 0.5 * u(rng);
    p.w_tilde.push_back(w);
    p.gamma_tilde.push_back(-(std::abs(w) + kappa + std::abs(u(rng))));
    p.s.push_back(2.0 * u(rng));
  }
  p.b = 0.1 + std::abs(u(rng));
  return p;
}

}  // namespace

TEST_CASE("certification examples") {
  CHECK(certify_bounded(params2({0, 0}, {-1, -1}, 1.0), 0.1).certified);
  const Certificate c = certify_bounded(params2({0, 0}, {-1, -1}, 1.0), 0.1);
  CHECK(c.min_slack == doctest::Approx(0.9));
  CHECK_FALSE(certify_bounded(params2({0, 0}, {-1, -1}, -0.5), 0.1).certified);
  const Certificate bad = certify_bounded(params2({0.1, 0}, {-0.05, -1}, 1.0), 0.0);
  CHECK_FALSE(bad.certified);
  CHECK(bad.tightest_dim == 0);
  CHECK(bad.min_slack == doctest::Approx(-0.05).epsilon(1e-12));
  CHECK_FALSE(certify_bounded(params2({0.2, 0}, {-0.2, -1}, 1.0), 0.0).certified);
}

TEST_CASE("boundary crossings solve the linear ray equation") {
  const ConeHeadParams p = params2({0.2, -0.1}, {-1, -1}, 0.5);
  const Crossing x = boundary_crossing(p, std::vector<double>{1, 0});
  REQUIRE(x.bounded);
  CHECK(x.t_star == doctest::Approx(0.625).epsilon(1e-9));
  const Crossing y = boundary_crossing(p, std::vector<double>{0, 1});
  REQUIRE(y.bounded);
  CHECK(y.t_star == doctest::Approx(0.5 / 1.1).epsilon(1e-9));
  CHECK(y.t_star == doctest::Approx(0.4545).epsilon(1e-4));
}

TEST_CASE("crossings shrink to the vertex as b goes to zero") {
  std::mt19937_64 rng(4);
  ConeHeadParams p = random_certified(rng, 3, 0.1);
  for (double b : {1e-2, 1e-5, 1e-8}) {
    p.b = b;
    for (const auto& probe : probe_directions(p, 50, 9)) {
      CHECK(probe.crossing.bounded);
      CHECK(probe.crossing.t_star <= b / 0.1 + 1e-6);
    }
  }
  p.b = -1.0;
  CHECK(boundary_crossing(p, std::vector<double>{1, 0, 0}).t_star == 0.0);
}

TEST_CASE("unbounded directions are flagged") {
  const ConeHeadParams p = params2({0.5, 0}, {-0.2, -1}, 1.0);
  const Crossing c = boundary_crossing(p, std::vector<double>{1, 0});
  CHECK(boundary_crossing(p, std::vector<double>{-1, 0}).bounded);
  CHECK_FALSE(c.bounded);
}

TEST_CASE("certified regions cross within the compactness bound") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t d = 2 + trial % 6;
    const ConeHeadParams p = random_certified(rng, d, 0.1);
    REQUIRE(certify_bounded(p, 0.1).certified);
    for (const auto& probe : probe_directions(p, 200, trial)) {
      double l1 = 0.0;
      for (double v : probe.direction) l1 += std::abs(v);
      CHECK(probe.crossing.bounded);
      CHECK(probe.crossing.t_star <= p.b / (0.1 * l1) + 1e-6);
    }
  }
}

TEST_CASE("Monte Carlo volume of L1 balls") {
  RegionProbeConfig cfg;
  cfg.n_volume_samples = 100000;
  auto within = [](const VolumeEstimate& v, double truth) { return std::abs(v.volume - truth) <= 3.0 * v.standard_error; };
  CHECK(within(mc_volume(params2({0, 0}, {-1, -1}, 1.0), cfg), 2.0));
  CHECK(within(mc_volume(params2({0, 0}, {-1, -1}, 2.0), cfg), 8.0));
  CHECK(within(mc_volume(params2({0, 0}, {-2, -2}, 1.0), cfg), 0.5));
  CHECK(within(mc_volume(params2({0, 0, 0}, {-1, -2, -0.5}, 1.5), cfg), 8.0 * std::pow(1.5, 3) / (6.0 * 1.0)));
}

TEST_CASE("closed-form volume agrees with sampling") {
  std::mt19937_64 rng(12);
  RegionProbeConfig cfg;
  cfg.n_volume_samples = 100000;
  for (int trial = 0; trial < 6; ++trial) {
    const ConeHeadParams p = random_certified(rng, 2 + trial % 3, 0.1);
    cfg.seed = trial;
    const VolumeEstimate mc = mc_volume(p, cfg);
    const double exact = std::exp(*exact_log_volume(p));
    CHECK(std::abs(mc.volume - exact) <= 4.0 * mc.standard_error);
  }
  CHECK(std::exp(*exact_log_volume(params2({0, 0}, {-1, -1}, 1.0))) == doctest::Approx(2.0));
  CHECK_FALSE(exact_log_volume(params2({0, 0}, {-1, -1}, -1.0)).has_value());
}

TEST_CASE("volume is non-decreasing in b") {
  std::mt19937_64 rng(13);
  const ConeHeadParams p = random_certified(rng, 3, 0.1);
  RegionProbeConfig cfg;
  cfg.n_volume_samples = 40000;
  const std::vector<double> offsets = {0.25, 0.5, 1.0, 2.0};
  const auto sweep = volume_sweep(p, offsets, cfg);
  REQUIRE(sweep.size() == 4);
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    CHECK(*sweep[i].log_volume > *sweep[i - 1].log_volume);
    const auto& a = *sweep[i - 1].monte_carlo;
    const auto& b = *sweep[i].monte_carlo;
    CHECK(b.volume + 3.0 * b.standard_error >= a.volume - 3.0 * a.standard_error);
  }
}

TEST_CASE("uncertified regions are refused by the sampler") {
  RegionProbeConfig cfg;
  CHECK_THROWS_AS(mc_volume(params2({0.3, 0}, {-0.1, -1}, 1.0), cfg), std::domain_error);
}

TEST_CASE("region report membership") {
  ModelConfig mc;
  mc.dense_dim = 2;
  mc.backbone.hidden = {2};
  Model model(mc);
  auto& layer = model.mlp()[0];
  layer.weight = Tensor({2, 2}, {1, 0, 0, 1});
  layer.weight.set_requires_grad(true);
  for (double& v : model.conic().s.values()) v = 0.5;

  Dataset d;
  d.dense_dim = 2;
  d.dense = {0.5, 0.5, 9.0, 9.0, 0.5, 0.5};
  d.labels = {1, 0, 0};
  const RegionReport r = region_report(model, d, 0.1);
  CHECK(r.certificate.certified);
  REQUIRE(r.positive_inside.has_value());
  CHECK(*r.positive_inside == 1.0);
  CHECK(*r.negative_inside == doctest::Approx(0.5));

  d.labels = {0, 0, 0};
  const RegionReport neg = region_report(model, d, 0.1);
  CHECK_FALSE(neg.positive_inside.has_value());
  CHECK(neg.n_positives == 0);
}
