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
#include <span>
#include <string>
#include <vector>

#include "rsdnet/data_io.hpp"
#include "rsdnet/divergence.hpp"
#include "rsdnet/network.hpp"

namespace rsdnet {

enum class AttackKind { fgsm, pgd };

std::string to_string(AttackKind kind);
AttackKind parse_attack_kind(const std::string& name);

struct AttackConfig {
  AttackKind kind = AttackKind::fgsm;
  double epsilon = 0.3;    // L-infinity budget
  double step_size = 0.01; // pgd only
  std::size_t max_iters = 100;
  double clip_min = 0.0;
  double clip_max = 1.0;

  void validate() const;
};

/// Input gradient of loss(f(x), label).
std::vector<double> input_gradient(const NetworkParams& params, const ArchitectureSpec& arch,
                                   std::span<const double> x, std::size_t label, const LossSpec& loss);

/// x' = proj(x + epsilon * sign(grad_x loss)), sign(0) = 0, where proj clamps
/// each coordinate to the epsilon-ball around x intersected with the clip box.
std::vector<double> fgsm(const NetworkParams& params, const ArchitectureSpec& arch, std::span<const double> x,
                         std::size_t label, const AttackConfig& cfg, const LossSpec& loss = LossSpec::cce());

/// max_iters signed steps of size step_size from x itself (no random start),
/// each followed by the same projection as fgsm.
std::vector<double> pgd(const NetworkParams& params, const ArchitectureSpec& arch, std::span<const double> x,
                        std::size_t label, const AttackConfig& cfg, const LossSpec& loss = LossSpec::cce());

/// Dispatches on cfg.kind.
std::vector<double> attack(const NetworkParams& params, const ArchitectureSpec& arch, std::span<const double> x,
                           std::size_t label, const AttackConfig& cfg, const LossSpec& loss = LossSpec::cce());

/// Replaces every example by its attacked version against the surrogate;
/// labels are unchanged.
Dataset adversarial_trainset(const NetworkParams& surrogate, const ArchitectureSpec& arch, const Dataset& data,
                             const AttackConfig& cfg);

}  // namespace rsdnet
