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

#include <algorithm>
#include <cmath>
#include <fstream>

#include "rsdnet/optimizer.hpp"
#include "test_support.hpp"

using namespace rsdnet;

namespace {

ArchitectureSpec toy_arch() { return {2, {{16, Activation::tanh}}, 2, false}; }

TrainConfig toy_config(LossSpec loss, std::size_t epochs, std::size_t batch) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = batch;
  cfg.shuffle_seed = 5;
  cfg.init_seed = 6;
  cfg.loss = loss;
  return cfg;
}

std::size_t first_epoch_reaching(const std::vector<EpochMetrics>& trace, double level) {
  for (const auto& m : trace)
    if (m.test_accuracy >= level) return m.epoch;
  return trace.size() + 1;
}

}  // namespace

TEST(Adam, ZeroGradientIsFixedPoint) {
  auto state = AdamState::zeros(3);
  std::vector<double> params{1.0, -2.0, 3.0};
  const std::vector<double> grad(3, 0.0);
  adam_step(state, {}, params, grad);
  EXPECT_EQ(params, (std::vector<double>{1.0, -2.0, 3.0}));
  EXPECT_EQ(state.t, 1u);
}

TEST(Adam, FirstStepIsSignedLearningRate) {
  auto state = AdamState::zeros(4);
  std::vector<double> params(4, 0.0);
  const std::vector<double> grad{3.0, -0.5, 1e-3, -40.0};
  AdamConfig cfg;
  adam_step(state, cfg, params, grad);
  for (std::size_t i = 0; i < 4; ++i) {
    // m_hat = g, v_hat = g^2 after the first bias-corrected step
    const double expected = -cfg.alpha * grad[i] / (std::abs(grad[i]) + cfg.epsilon);
    EXPECT_NEAR(params[i], expected, 1e-18);
  }
}

TEST(Adam, DeterministicAndShapeChecked) {
  auto s1 = AdamState::zeros(2), s2 = AdamState::zeros(2);
  std::vector<double> p1{0.5, 0.5}, p2{0.5, 0.5};
  const std::vector<double> g{0.1, -0.2};
  for (int i = 0; i < 10; ++i) {
    adam_step(s1, {}, p1, g);
    adam_step(s2, {}, p2, g);
  }
  EXPECT_EQ(p1, p2);
  EXPECT_EQ(s1.m, s2.m);
  const std::vector<double> wrong(3, 0.0);
  EXPECT_THROW(adam_step(s1, {}, p1, wrong), std::invalid_argument);
}

TEST(Training, EpochTouchesEveryExampleOnce) {
  for (std::size_t epoch : {1u, 2u, 17u}) {
    auto order = epoch_order(103, 9, epoch);
    std::sort(order.begin(), order.end());
    for (std::size_t i = 0; i < order.size(); ++i) EXPECT_EQ(order[i], i);
  }
  EXPECT_NE(epoch_order(50, 9, 1), epoch_order(50, 9, 2));
}

TEST(Training, SeparableToyReachesFullTrainAccuracy) {
  const auto data = synthetic_blobs({}, 1);
  const auto arch = toy_arch();
  const auto result = train(data, arch, toy_config(LossSpec::sd(TuningPair::make(0.1, -0.5)), 50, 8));
  EXPECT_GE(accuracy(result.params, arch, data), 0.99);
  EXPECT_EQ(result.trace.size(), 50u);
  EXPECT_TRUE(std::isnan(result.trace.back().test_accuracy));
}

TEST(Training, DeterministicTraces) {
  const auto data = synthetic_blobs({}, 2);
  const auto cfg = toy_config(LossSpec::gce(0.7), 5, 16);
  const auto a = train(data, toy_arch(), cfg);
  const auto b = train(data, toy_arch(), cfg);
  EXPECT_EQ(a.params.flat, b.params.flat);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) EXPECT_EQ(a.trace[i].train_loss, b.trace[i].train_loss);
}

TEST(Training, TrimmedLossConvergesMoreSlowly) {
  const auto data = synthetic_blobs({}, 3);
  const auto arch = toy_arch();
  const auto cce = train(data, arch, toy_config(LossSpec::cce(), 100, 32), {}, &data);
  const auto tcce = train(data, arch, toy_config(LossSpec::tcce(0.3), 100, 32), {}, &data);
  const auto e_cce = first_epoch_reaching(cce.trace, 0.95);
  const auto e_tcce = first_epoch_reaching(tcce.trace, 0.95);
  EXPECT_LE(e_tcce, 100u);
  EXPECT_GT(e_tcce, e_cce);
}

TEST(Training, LossNonIncreasingAfterWarmup) {
  const auto data = synthetic_blobs({}, 4);
  const auto result = train(data, toy_arch(), toy_config(LossSpec::sd(TuningPair::make(0.1, -0.5)), 50, 16));
  for (std::size_t e = 5; e < result.trace.size(); ++e)
    EXPECT_LE(result.trace[e].train_loss, 1.05 * result.trace[e - 1].train_loss) << "epoch " << e + 1;
}

TEST(Training, RejectsMismatchedData) {
  const auto data = synthetic_blobs({.n = 20, .classes = 3, .dim = 2}, 1);
  EXPECT_THROW(train(data, toy_arch(), toy_config(LossSpec::cce(), 1, 4)), std::invalid_argument);
  Dataset empty;
  empty.dim = 2;
  empty.classes = 2;
  EXPECT_THROW(train(empty, toy_arch(), toy_config(LossSpec::cce(), 1, 4)), std::invalid_argument);
}

TEST(Training, BatchGradientMatchesFiniteDifferences) {
  const auto data = synthetic_blobs({.n = 12, .classes = 3, .dim = 2}, 8);
  const ArchitectureSpec arch{2, {{5, Activation::tanh}}, 3, false};
  const auto params = init_params(arch, InitScheme::glorot_normal, 3);
  const std::vector<std::size_t> batch{0, 3, 4, 7, 11};
  for (const auto& loss : {LossSpec::cce(), LossSpec::sd(TuningPair::make(0.3, -0.6)), LossSpec::gce(0.5)}) {
    const auto g = batch_gradient(params, arch, data, batch, loss);
    const auto fd = rsdnet::testing::central_difference(
        [&](std::span<const double> th) {
          return batch_gradient(make_params(arch, {th.begin(), th.end()}), arch, data, batch, loss).loss;
        },
        params.flat);
    EXPECT_LT(rsdnet::testing::rel_error(g.grad, fd), 1e-6) << loss.name();
  }
}

TEST(Training, MetricsCsv) {
  const auto dir = rsdnet::testing::scratch_dir("metrics");
  write_metrics({{1, 0.5, 0.75}, {2, 0.25, std::nan("")}}, dir / "m.csv");
  std::ifstream in(dir / "m.csv");
  std::string all((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(all, "epoch,train_loss,test_accuracy\n1,0.5,0.75\n2,0.25,NA\n");
}
