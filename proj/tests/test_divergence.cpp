/*
 * Copyright 2026 The rsdnet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "rsdnet/divergence.hpp"
#include "rsdnet/theory.hpp"
#include "test_support.hpp"

using namespace rsdnet;
using rsdnet::testing::interior_simplex;
using rsdnet::testing::random_tuning;
using rsdnet::testing::rel_error;

namespace {

const std::vector<double> kHalf{0.5, 0.5};
const std::vector<double> kE1{1.0, 0.0};

double sum_over_labels(const std::vector<double>& p, const TuningPair& t) {
  double s = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) s += sd_loss(OneHotLabel(j, p.size()), p, t);
  return s;
}

}  // namespace

TEST(Tuning, DerivedConstants) {
  const auto t = TuningPair::make(0.5, 0.0);
  EXPECT_DOUBLE_EQ(t.a(), 1.0);
  EXPECT_DOUBLE_EQ(t.b(), 0.5);
  const auto l2 = TuningPair::make(1.0, 7.0);
  EXPECT_DOUBLE_EQ(l2.a(), 1.0);
  EXPECT_DOUBLE_EQ(l2.b(), 1.0);
}

TEST(Tuning, RejectsKldAndReverseKld) {
  try {
    TuningPair::make(0.0, 0.0);
    FAIL() << "KLD point accepted";
  } catch (const TuningError& e) {
    EXPECT_EQ(e.reason(), TuningRejection::b_nonpositive);
  }
  try {
    TuningPair::make(0.0, -1.0);
    FAIL() << "reverse KLD point accepted";
  } catch (const TuningError& e) {
    EXPECT_EQ(e.reason(), TuningRejection::a_nonpositive);
  }
  EXPECT_EQ(TuningPair::check(1.5, 0.0), TuningRejection::beta_out_of_range);
  EXPECT_EQ(TuningPair::check(-0.1, 0.0), TuningRejection::beta_out_of_range);
  EXPECT_THROW(TuningPair::make(std::nan(""), 0.0), std::invalid_argument);
  EXPECT_THROW(TuningPair::make(0.5, std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST(Tuning, ConstantsSumToOnePlusBeta) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const auto t = random_tuning(rng, 1e-6);
    EXPECT_NEAR(t.a() + t.b(), 1.0 + t.beta(), 4 * std::numeric_limits<double>::epsilon() * (2 + std::abs(t.lambda())));
  }
}

TEST(ProbVectorTest, ValidatesSimplex) {
  EXPECT_NO_THROW(ProbVector({0.2, 0.8}));
  EXPECT_THROW(ProbVector({0.2, 0.7}), std::invalid_argument);
  EXPECT_THROW(ProbVector({-0.1, 1.1}), std::invalid_argument);
  EXPECT_THROW(ProbVector({}), std::invalid_argument);
  EXPECT_DOUBLE_EQ(ProbVector::uniform(4)[3], 0.25);
  EXPECT_DOUBLE_EQ(ProbVector::vertex(3, 2)[2], 1.0);
  EXPECT_THROW(OneHotLabel(3, 3), std::invalid_argument);
}

TEST(SdLoss, WorkedValues) {
  const OneHotLabel e1(0, 2);
  EXPECT_NEAR(sd_loss(e1, kE1, TuningPair::make(0.5, 0.0)), 2.0, 1e-12);
  EXPECT_NEAR(sd_loss(e1, kHalf, TuningPair::make(1.0, 3.0)), 1.5, 1e-12);
  EXPECT_NEAR(sd_loss(e1, kHalf, TuningPair::make(0.5, 0.0)), 4.0 - std::sqrt(2.0), 1e-12);
}

TEST(SdLoss, VertexValueIsJMinusOneOverB) {
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const auto t = random_tuning(rng);
    const std::size_t J = 2 + rng.below(9);
    const std::size_t k = rng.below(J);
    std::vector<double> p(J, 0.0);
    p[k] = 1.0;
    EXPECT_NEAR(sd_loss(OneHotLabel(k, J), p, t), (J - 1.0) / t.b(), 1e-9 * (J - 1.0) / t.b());
  }
}

TEST(SdLoss, BetaOneClosedForm) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t J = 2 + rng.below(9);
    const auto p = rsdnet::testing::any_simplex(rng, J);
    const std::size_t y = rng.below(J);
    const auto t = TuningPair::make(1.0, rng.uniform(-10, 10));
    double expected = J - 1.0;
    for (std::size_t j = 0; j < J; ++j) expected += std::pow(p[j] - (j == y ? 1.0 : 0.0), 2);
    EXPECT_NEAR(sd_loss(OneHotLabel(y, J), p, t), expected, 1e-12);
  }
}

TEST(SdLoss, GradProbsWorkedValues) {
  const auto g = sd_loss_grad_probs(OneHotLabel(0, 2), kHalf, TuningPair::make(1.0, 0.0));
  EXPECT_NEAR(g[0], -1.0, 1e-12);
  EXPECT_NEAR(g[1], 1.0, 1e-12);
  const std::vector<double> near_vertex{1.0 - 1e-12, 1e-12};
  const auto h = sd_loss_grad_probs(OneHotLabel(0, 2), near_vertex, TuningPair::make(0.5, 0.0));
  // probabilities are clipped 1e-7 away from the vertex
  EXPECT_NEAR(h[0], 0.0, 1e-6);
}

TEST(SdLoss, GradLogitsWorkedValue) {
  const std::vector<double> z{0.3, 0.3};
  const auto g = sd_loss_grad_logits(OneHotLabel(0, 2), z, TuningPair::make(1.0, 0.0));
  EXPECT_NEAR(g[0], -0.5, 1e-12);
  EXPECT_NEAR(g[1], 0.5, 1e-12);
}

TEST(SdLoss, GradientsMatchFiniteDifferences) {
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const auto t = random_tuning(rng);
    const std::size_t J = 2 + rng.below(9);
    const OneHotLabel u(rng.below(J), J);
    const auto p = interior_simplex(rng, J);
    const auto fd = rsdnet::testing::central_difference([&](std::span<const double> q) { return sd_loss(u, q, t); }, p);
    EXPECT_LT(rel_error(sd_loss_grad_probs(u, p, t), fd), 1e-6);

    std::vector<double> z(J);
    for (auto& v : z) v = 2.0 * rng.normal();
    const auto fdz = rsdnet::testing::central_difference(
        [&](std::span<const double> q) { return sd_loss(u, softmax(q), t); }, z, 1e-3);
    EXPECT_LT(rel_error(sd_loss_grad_logits(u, z, t), fdz), 1e-6);
  }
}

TEST(SdLoss, DiffersFromRiskByConstant) {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto t = random_tuning(rng);
    const std::size_t J = 2 + rng.below(5);
    const std::size_t y = rng.below(J);
    const OneHotLabel u(y, J);
    std::vector<double> u_prob(J, 0.0);
    u_prob[y] = 1.0;
    const auto p = interior_simplex(rng, J);
    const auto diff = rsdnet::testing::central_difference(
        [&](std::span<const double> q) { return sd_loss(u, q, t) - conditional_sd_risk(u_prob, q, t); }, p);
    for (double d : diff) EXPECT_NEAR(d, 0.0, 1e-6);
  }
}

TEST(Softmax, StaysOnSimplex) {
  Rng rng(6);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> z(2 + rng.below(9));
    for (auto& v : z) v = rng.uniform(-800, 800);
    const auto p = softmax(z);
    double s = 0.0;
    for (double v : p) {
      ASSERT_TRUE(std::isfinite(v));
      EXPECT_GE(v, 0.0);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
}

TEST(ConditionalRisk, ZeroAtTruthPositiveElsewhere) {
  Rng rng(7);
  for (const auto& t : rsdnet::testing::tuning_grid()) {
    const auto p = interior_simplex(rng, 4);
    EXPECT_NEAR(conditional_sd_risk(p, p, t), 0.0, 1e-12);
    EXPECT_NEAR(conditional_sd_risk(kE1, kE1, t), 0.0, 1e-12);
  }
  const std::vector<double> ps{0.7, 0.3}, q{0.3, 0.7};
  EXPECT_GT(conditional_sd_risk(ps, q, TuningPair::make(0.5, -0.5)), 0.0);
}

TEST(LossBounds, BetaOneBinaryExtremes) {
  const auto t = TuningPair::make(1.0, 0.0);
  const auto b = loss_bounds(t, 2);
  EXPECT_NEAR(b.lower, 3.0, 1e-12);
  EXPECT_NEAR(b.upper, 4.0, 1e-12);
  EXPECT_NEAR(sum_over_labels(kHalf, t), 3.0, 1e-12);
  EXPECT_NEAR(sum_over_labels(kE1, t), 4.0, 1e-12);
}

TEST(LossBounds, HoldOnRandomSimplexPoints) {
  Rng rng(8);
  for (const auto& t : rsdnet::testing::tuning_grid()) {
    for (std::size_t J : {2u, 3u, 10u}) {
      const auto b = loss_bounds(t, J);
      EXPECT_LT(b.lower, b.upper);
      for (int i = 0; i < 2000; ++i) {
        const double s = sum_over_labels(rsdnet::testing::any_simplex(rng, J), t);
        const double tol = 1e-9 * std::max(1.0, std::abs(b.upper));
        EXPECT_GE(s, b.lower - tol);
        EXPECT_LE(s, b.upper + tol);
      }
    }
  }
}

TEST(Calibration, BinaryArgminNearTruth) {
  const ProbVector ps({0.6, 0.4});
  for (const auto& t : rsdnet::testing::tuning_grid()) {
    const auto r = calibration_check(ps, t, 100);
    EXPECT_LE(r.linf_to_p_star, 0.01 + 1e-12) << t.beta() << "," << t.lambda();
    EXPECT_EQ(r.argmin_class, 0u);
    EXPECT_TRUE(r.calibrated);
    EXPECT_GT(r.runner_up_gap, 0.0);
  }
}

TEST(Calibration, UniformTruthGivesSymmetricRisk) {
  const std::vector<double> u{1.0 / 3, 1.0 / 3, 1.0 / 3};
  const std::vector<double> p{0.5, 0.3, 0.2}, q{0.2, 0.5, 0.3};
  const auto t = TuningPair::make(0.3, -0.4);
  EXPECT_NEAR(conditional_sd_risk(u, p, t), conditional_sd_risk(u, q, t), 1e-14);
}

TEST(Baselines, WorkedValues) {
  const std::vector<double> sure{1.0, 0.0};
  EXPECT_NEAR(example_loss(LossSpec::cce(), 0, sure), 0.0, 1e-12);
  const std::vector<double> p{0.25, 0.75};
  EXPECT_NEAR(example_loss(LossSpec::mae(), 0, p), 1.5, 1e-12);
  EXPECT_NEAR(example_loss(LossSpec::gce(0.5), 0, p), 1.0, 1e-12);
  EXPECT_THROW(LossSpec::gce(0.0), std::invalid_argument);
  EXPECT_THROW(LossSpec::tcce(1.0), std::invalid_argument);
  EXPECT_EQ(LossSpec::sd(TuningPair::make(0.1, -0.5)).name(), "sd(0.1,-0.5)");
  EXPECT_EQ(LossSpec::gce(0.7).name(), "gce(0.7)");
}

TEST(Baselines, GradientsMatchFiniteDifferences) {
  Rng rng(9);
  for (const auto& loss : {LossSpec::cce(), LossSpec::gce(0.7), LossSpec::mae()}) {
    for (int i = 0; i < 100; ++i) {
      const auto p = interior_simplex(rng, 4);
      const std::size_t y = rng.below(4);
      const auto fd = rsdnet::testing::central_difference(
          [&](std::span<const double> q) { return example_loss(loss, y, q); }, p);
      EXPECT_LT(rel_error(example_loss_grad_probs(loss, y, p), fd), 1e-6) << loss.name();
    }
  }
}

TEST(Baselines, TrimmedBatchDropsLargestLosses) {
  const std::vector<std::size_t> labels{0, 0, 0, 0};
  const std::vector<std::vector<double>> probs{{0.9, 0.1}, {0.2, 0.8}, {0.6, 0.4}, {0.05, 0.95}};
  const auto b = batch_loss(LossSpec::tcce(0.5), labels, probs);
  EXPECT_DOUBLE_EQ(b.weights[1], 0.0);
  EXPECT_DOUBLE_EQ(b.weights[3], 0.0);
  EXPECT_DOUBLE_EQ(b.weights[0], 0.5);
  EXPECT_DOUBLE_EQ(b.weights[2], 0.5);
  EXPECT_NEAR(b.aggregate, 0.5 * (-std::log(0.9) - std::log(0.6)), 1e-12);

  const auto plain = batch_loss(LossSpec::cce(), labels, probs);
  for (double w : plain.weights) EXPECT_DOUBLE_EQ(w, 0.25);

  const std::vector<std::size_t> one{0};
  const std::vector<std::vector<double>> single{{0.5, 0.5}};
  EXPECT_DOUBLE_EQ(batch_loss(LossSpec::tcce(0.9), one, single).weights[0], 1.0);
}
