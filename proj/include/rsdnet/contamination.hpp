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

#include <cstdint>
#include <vector>

#include "rsdnet/data_io.hpp"
#include "rsdnet/divergence.hpp"

namespace rsdnet {

struct NoiseConfig {
  double eta = 0.0;  // in [0, 1)
  std::uint64_t seed = 0;
};

struct CorruptedDataset {
  Dataset data;
  /// 1 where the label was replaced.
  std::vector<std::uint8_t> flip_mask;
};

/// Uniform label noise: each label independently flips with probability eta
/// to a class drawn uniformly from the other J-1. Every example consumes
/// exactly two draws (flip, replacement) in index order.
CorruptedDataset corrupt_labels(const Dataset& data, const NoiseConfig& cfg);

/// Posterior of the observed label under uniform noise:
///   (1-eta) p*_j + eta/(J-1) (1 - p*_j).
ProbVector noisy_posterior(const ProbVector& p_star, double eta);

}  // namespace rsdnet
