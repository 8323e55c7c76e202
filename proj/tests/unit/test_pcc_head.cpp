#include <doctest.h>

#include <cmath>
#include <random>

#include "dcpcc/errors.hpp"
#include "dcpcc/pcc_head.hpp"
#include "helpers.hpp"

using namespace dcpcc;

namespace {

ConeHeadParams example_params() {
  ConeHeadParams p;
  p.w_tilde = {0.2, -0.1};
  p.gamma_tilde = {-1.0, -1.0};
  p.b = 0.5;
  p.s = {0.0, 0.0};
  return p;
}

PccHead head_from(const ConeHeadParams& p) {
  std::mt19937_64 rng(0);
  PccHead head(p.dim(), p.kind, 0.1, rng);
  for (std::size_t m = 0; m < p.dim(); ++m) {
    head.w_tilde[m] = p.w_tilde[m];
    head.s[m] = p.s[m];
  }
  for (std::size_t m = 0; m < p.gamma_tilde.size(); ++m) head.gamma_tilde[m] = p.gamma_tilde[m];
  head.b[0] = p.b;
  return head;
}

}  // namespace

TEST_CASE("the vertex always scores b") {
  ConeHeadParams p = example_params();
  p.s = {0.3, -1.2};
  CHECK(score_point(p.s, p) == p.b);
  const Tensor f({1, 2}, p.s);
  CHECK(score_epcf(f, p)[0] == p.b);
}

TEST_CASE("EPCF hand examples") {
  const ConeHeadParams p = example_params();
  const Tensor f({2, 2}, {1.0, 1.0, 0.3, 0.0});
  const auto scores = score_epcf(f, p);
  CHECK(scores[0] == doctest::Approx(-1.4).epsilon(1e-15));
  CHECK(scores[1] == doctest::Approx(0.26).epsilon(1e-15));
}

TEST_CASE("PCF with scalar gamma equals EPCF with a constant gamma vector") {
  std::mt19937_64 rng(8);
  ConeHeadParams pcf;
  pcf.kind = ConeKind::pcf;
  pcf.w_tilde = {0.3, -0.2, 0.1};
  pcf.gamma_tilde = {-1.0};
  pcf.b = 0.7;
  pcf.s = {0.1, 0.0, -0.4};
  ConeHeadParams epcf = pcf;
  epcf.kind = ConeKind::epcf;
  epcf.gamma_tilde = {-1.0, -1.0, -1.0};
  const Tensor f = testing::random_tensor({50, 3}, rng, -3, 3);
  const auto a = score_pcf(f, pcf);
  const auto b = score_epcf(f, epcf);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-14));
  CHECK(score_point(pcf.s, pcf) == pcf.b);
  CHECK_THROWS_AS(score_pcf(f, epcf), ShapeError);
}

TEST_CASE("PCF hand example") {
  ConeHeadParams p;
  p.kind = ConeKind::pcf;
  p.w_tilde = {0.0, 0.0};
  p.gamma_tilde = {-1.0};
  p.b = 1.0;
  p.s = {0.0, 0.0};
  CHECK(score_pcf(Tensor({1, 2}, {0.5, 0.3}), p)[0] == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("sigmoid probabilities") {
  const std::vector<double> scores = {0.0, -1.4, 0.5};
  const auto p = predict_proba(scores);
  CHECK(p[0] == 0.5);
  CHECK(p[1] == doctest::Approx(0.19782).epsilon(1e-5));
  CHECK(p[2] == doctest::Approx(0.62246).epsilon(1e-5));
  CHECK(sigmoid(-30.0) > 0.0);
  CHECK(sigmoid(30.0) < 1.0);
  CHECK(sigmoid(-800.0) == 0.0);
  CHECK(sigmoid(800.0) == 1.0);
}

TEST_CASE("constraint slack arithmetic") {
  ConeHeadParams p;
  p.w_tilde = {0.2, 0.1, 0.0};
  p.gamma_tilde = {-1.0, -0.15, -0.1};
  p.s = {0, 0, 0};
  const auto slack = constraint_slack(p, 0.1);
  CHECK(slack[0] == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(slack[1] == doctest::Approx(-0.05).epsilon(1e-12));
  CHECK(slack[2] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("accepted iff positive score iff negative classical value") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 200; ++trial) {
    ConeHeadParams p;
    p.kind = trial % 2 ? ConeKind::pcf : ConeKind::epcf;
    const std::size_t d = 1 + trial % 5;
    for (std::size_t m = 0; m < d; ++m) {
      p.w_tilde.push_back(u(rng) * 0.3);
      p.s.push_back(u(rng));
    }
    p.gamma_tilde.assign(p.kind == ConeKind::pcf ? 1 : d, 0.0);
    for (double& g : p.gamma_tilde) g = -std::abs(u(rng));
    p.b = u(rng);
    std::vector<double> x(d);
    for (double& v : x) v = u(rng);
    const double score = score_point(x, p);
    const double classical = classical_value(x, p);
    CHECK(score == doctest::Approx(-classical).epsilon(1e-13));
    if (std::abs(score) > 1e-12) CHECK((score > 0) == (classical < 0));
  }
}

TEST_CASE("score gradient with respect to f is w + gamma * sign(f - s)") {
  std::mt19937_64 rng(6);
  ConeHeadParams p = example_params();
  p.w_tilde = {0.2, -0.1, 0.05};
  p.gamma_tilde = {-1.0, -0.4, -0.7};
  p.s = {0.1, -0.2, 0.3};
  PccHead head = head_from(p);
  Tensor f = testing::random_tensor({6, 3}, rng, -2, 2);
  for (std::size_t i = 0; i < f.rows(); ++i) {
    for (std::size_t m = 0; m < 3; ++m) {
      if (std::abs(f(i, m) - p.s[m]) < 1e-3) f(i, m) += 0.01;
    }
  }
  f.set_requires_grad(true);
  Tape tape;
  tape.backward(tape.sum(head.score(tape, tape.parameter(f))));
  for (std::size_t i = 0; i < f.rows(); ++i) {
    for (std::size_t m = 0; m < 3; ++m) {
      const double sign = f(i, m) > p.s[m] ? 1.0 : -1.0;
      CHECK(f.grad()[i * 3 + m] == doctest::Approx(p.w_tilde[m] + p.gamma_tilde[m] * sign).epsilon(1e-14));
    }
  }
}

TEST_CASE("score is strictly increasing in b") {
  std::mt19937_64 rng(12);
  ConeHeadParams p = example_params();
  const Tensor f = testing::random_tensor({30, 2}, rng, -2, 2);
  const auto lo = score_epcf(f, p);
  p.b += 0.25;
  const auto hi = score_epcf(f, p);
  for (std::size_t i = 0; i < lo.size(); ++i) CHECK(hi[i] > lo[i]);
}

TEST_CASE("tape head agrees with the direct scorer") {
  std::mt19937_64 rng(13);
  for (ConeKind kind : {ConeKind::epcf, ConeKind::pcf}) {
    ConeHeadParams p = example_params();
    p.kind = kind;
    if (kind == ConeKind::pcf) p.gamma_tilde = {-0.8};
    PccHead head = head_from(p);
    const Tensor f = testing::random_tensor({10, 2}, rng, -2, 2);
    Tape tape;
    const Tensor& s = tape.value(head.score(tape, tape.constant(f)));
    const auto expect = kind == ConeKind::pcf ? score_pcf(f, p) : score_epcf(f, p);
    for (std::size_t i = 0; i < expect.size(); ++i) CHECK(s[i] == doctest::Approx(expect[i]).epsilon(1e-14));
  }
}

TEST_CASE("fresh head satisfies the compactness constraint") {
  std::mt19937_64 rng(1);
  PccHead head(16, ConeKind::epcf, 0.1, rng);
  for (double s : constraint_slack(head.params(), 0.1)) CHECK(s > 0.0);
  CHECK(head.params().b > 0.0);
  CHECK_FALSE(head.s.requires_grad());
}
