#include <doctest.h>

#include <cmath>
#include <random>

#include "dcpcc/errors.hpp"
#include "dcpcc/metrics.hpp"
#include "dcpcc/pcc_head.hpp"

using namespace dcpcc;

namespace {

double brute_force_auc(const std::vector<double>& s, const std::vector<std::uint8_t>& y) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      if (s[i] > s[j]) wins += 1.0;
      else if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

}  // namespace

TEST_CASE("AUC hand cases") {
  CHECK(auc(std::vector<double>{0.9, 0.1}, std::vector<std::uint8_t>{1, 0}) == 1.0);
  CHECK(auc(std::vector<double>{0.4, 0.4, 0.4}, std::vector<std::uint8_t>{1, 0, 1}) == 0.5);
  CHECK(auc(std::vector<double>{0.8, 0.7, 0.3, 0.2}, std::vector<std::uint8_t>{1, 0, 1, 0}) == 0.75);
}

TEST_CASE("AUC of a single class is undefined") {
  try {
    (void)auc(std::vector<double>{0.1, 0.2}, std::vector<std::uint8_t>{1, 1});
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("AUC undefined") != std::string::npos);
  }
  CHECK_THROWS_AS(auc(std::vector<double>{NAN, 0.2}, std::vector<std::uint8_t>{1, 0}), NumericError);
  CHECK_THROWS_AS(auc(std::vector<double>{0.2}, std::vector<std::uint8_t>{1, 0}), std::invalid_argument);
}

TEST_CASE("AUC matches pairwise brute force including ties") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 300;
    const int levels = trial % 3 == 0 ? 3 : 1000000;
    std::vector<double> s(n);
    std::vector<std::uint8_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng() % levels) / levels;
      y[i] = rng() % 2;
    }
    y[0] = 1;
    y[1] = 0;
    CHECK(std::abs(auc(s, y) - brute_force_auc(s, y)) <= 1e-12);
  }
}

TEST_CASE("AUC is invariant under strictly monotone transforms") {
  std::mt19937_64 rng(78);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s(100);
    std::vector<std::uint8_t> y(100);
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = std::normal_distribution<double>(0, 3)(rng);
      y[i] = rng() % 2;
    }
    y[0] = 1;
    y[1] = 0;
    const auto p = predict_proba(s);
    std::vector<double> cubed(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) cubed[i] = s[i] * s[i] * s[i] + 2.0;
    CHECK(auc(p, y) == auc(s, y));
    CHECK(auc(cubed, y) == auc(s, y));
  }
}

TEST_CASE("logloss values") {
  CHECK(logloss(std::vector<double>{0.5, 0.5}, std::vector<std::uint8_t>{1, 0}) ==
        doctest::Approx(0.69315).epsilon(1e-5));
  CHECK(logloss(std::vector<double>{1.0, 0.0}, std::vector<std::uint8_t>{1, 0}) ==
        doctest::Approx(2.76e-11).epsilon(0.01));
  CHECK(logloss(std::vector<double>{0.25}, std::vector<std::uint8_t>{1}) == doctest::Approx(1.38629).epsilon(1e-5));
}

TEST_CASE("RelaImp against published rows") {
  CHECK(relaimp(0.76464, 0.76330) == doctest::Approx(0.51).epsilon(0.01 / 0.51));
  CHECK(std::abs(relaimp(0.76464, 0.76330) - 0.51) <= 0.01);
  CHECK(std::abs(relaimp(0.97081, 0.96866) - 0.46) <= 0.01);
  CHECK(std::abs(relaimp(0.76427, 0.76429) - (-0.01)) <= 0.01);
  for (double x : {0.51, 0.7, 0.999}) CHECK(relaimp(x, x) == 0.0);
  CHECK_THROWS_AS(relaimp(0.6, 0.5), std::invalid_argument);
}

TEST_CASE("report carries RelaImp only with a baseline") {
  const std::vector<double> s = {0.9, 0.1, 0.8, 0.3};
  const std::vector<std::uint8_t> y = {1, 0, 1, 0};
  const auto p = predict_proba(s);
  const MetricsReport plain = make_report(s, p, y);
  CHECK(plain.auc == 1.0);
  CHECK(plain.n_positives == 2);
  CHECK_FALSE(plain.relaimp.has_value());
  const MetricsReport rel = make_report(s, p, y, 0.75);
  REQUIRE(rel.relaimp.has_value());
  CHECK(*rel.relaimp == doctest::Approx(100.0));
  CHECK(rel.record().find("relaimp=") != std::string::npos);
}
