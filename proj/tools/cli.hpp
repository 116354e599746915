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
#include <string>
#include <vector>

#include "rsdnet/attacks.hpp"
#include "rsdnet/data_io.hpp"
#include "rsdnet/divergence.hpp"
#include "rsdnet/network.hpp"

namespace rsdnet::cli {

enum ExitCode : int { kOk = 0, kBadFlags = 2, kBadData = 3, kNumericFailure = 4 };

/// Entry point shared by the executable and the tests. args[0] is the
/// program name.
int run(const std::vector<std::string>& args);

/// Named hidden-layer template; input and output widths come from the data.
///   mnist-mlp 128-128 relu, fmnist-mlp 200-100 relu, surrogate-64 64 relu,
///   toy 16 tanh, or "mlp:W1-W2-...:activation".
ArchitectureSpec resolve_arch(const std::string& preset, std::size_t input_dim, std::size_t classes);

/// Comma-separated loss list: cce, mae, gce:Q, tcce:D, sd (uses the given
/// default tuning) or sd:BETA:LAMBDA.
std::vector<LossSpec> parse_losses(const std::string& list, double beta, double lambda);

/// blobs[:N[:J[:DIM[:SPREAD]]]], example1[:N], idx:IMAGES,LABELS or
/// csv:FEATURES,LABELS. `limit` keeps only the first rows when non-zero.
Dataset load_dataset(const std::string& selector, std::uint64_t seed, std::size_t limit = 0);

}  // namespace rsdnet::cli
