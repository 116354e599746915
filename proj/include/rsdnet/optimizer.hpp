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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "rsdnet/data_io.hpp"
#include "rsdnet/divergence.hpp"
#include "rsdnet/network.hpp"

namespace rsdnet {

struct AdamConfig {
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;

  static AdamState zeros(std::size_t parameter_count);
};

/// One bias-corrected Adam update of params in place:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2,  t <- t+1,
///   params <- params - alpha * mhat / (sqrt(vhat) + eps).
void adam_step(AdamState& state, const AdamConfig& config, std::span<double> params, std::span<const double> grad);

struct TrainConfig {
  std::size_t epochs = 250;
  std::size_t batch_size = 128;
  std::uint64_t shuffle_seed = 0;
  std::uint64_t init_seed = 0;
  InitScheme init = InitScheme::glorot_normal;
  LossSpec loss = LossSpec::cce();

  void validate() const;
};

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  /// Accuracy on the held-out set after this epoch; NaN without one.
  double test_accuracy = 0.0;
};

struct TrainResult {
  NetworkParams params;
  std::vector<EpochMetrics> trace;
};

/// Order in which epoch `epoch` (0-based) visits the n training examples.
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t shuffle_seed, std::size_t epoch);

/// Average loss gradient over one mini-batch, and the batch aggregate loss.
struct BatchGradient {
  std::vector<double> grad;
  double loss = 0.0;
};
BatchGradient batch_gradient(const NetworkParams& params, const ArchitectureSpec& arch, const Dataset& data,
                             std::span<const std::size_t> batch, const LossSpec& loss);

/// Mini-batch Adam training from a fresh initialization. Epoch e (0-based)
/// shuffles with seed shuffle_seed + e; the last short batch is kept.
TrainResult train(const Dataset& data, const ArchitectureSpec& arch, const TrainConfig& config,
                  const AdamConfig& adam = {}, const Dataset* held_out = nullptr);

double accuracy(const NetworkParams& params, const ArchitectureSpec& arch, const Dataset& data);

/// CSV rows: epoch,train_loss,test_accuracy (NA when there is no held-out set).
void write_metrics(const std::vector<EpochMetrics>& trace, const std::filesystem::path& path);

}  // namespace rsdnet
