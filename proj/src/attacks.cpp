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

#include "rsdnet/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rsdnet {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Box [lower, upper] for one coordinate such that every value inside it
// satisfies |value - x| <= eps when evaluated in floating point.
struct Box {
  double lower;
  double upper;
};

Box feasible_box(double x, const AttackConfig& cfg) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  double hi = x + cfg.epsilon;
  while (hi - x > cfg.epsilon) hi = std::nextafter(hi, -inf);
  double lo = x - cfg.epsilon;
  while (x - lo > cfg.epsilon) lo = std::nextafter(lo, inf);
  return {std::max(lo, cfg.clip_min), std::min(hi, cfg.clip_max)};
}

std::vector<Box> feasible_boxes(std::span<const double> x, const AttackConfig& cfg) {
  std::vector<Box> boxes(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < cfg.clip_min || x[i] > cfg.clip_max) throw std::invalid_argument("attack: input outside the clip box");
    boxes[i] = feasible_box(x[i], cfg);
  }
  return boxes;
}

void signed_step(std::vector<double>& x, std::span<const double> grad, double step, const std::vector<Box>& boxes) {
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = std::clamp(x[i] + step * sign(grad[i]), boxes[i].lower, boxes[i].upper);
}

}  // namespace

std::string to_string(AttackKind kind) { return kind == AttackKind::fgsm ? "fgsm" : "pgd"; }

AttackKind parse_attack_kind(const std::string& name) {
  if (name == "fgsm") return AttackKind::fgsm;
  if (name == "pgd") return AttackKind::pgd;
  throw std::invalid_argument("unknown attack '" + name + "'");
}

void AttackConfig::validate() const {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("attack: epsilon must be >= 0");
  if (!(step_size > 0.0)) throw std::invalid_argument("attack: step size must be positive");
  if (max_iters < 1) throw std::invalid_argument("attack: max_iters must be >= 1");
  if (!(clip_min <= clip_max)) throw std::invalid_argument("attack: empty clip range");
}

std::vector<double> input_gradient(const NetworkParams& params, const ArchitectureSpec& arch,
                                   std::span<const double> x, std::size_t label, const LossSpec& loss) {
  const auto trace = forward(params, arch, x);
  const auto grad_logits = softmax_pullback(trace.probs, example_loss_grad_probs(loss, label, trace.probs));
  std::vector<double> grad_params(params.size(), 0.0), grad_input(x.size(), 0.0);
  backward_accumulate(trace, params, arch, grad_logits, 1.0, grad_params, grad_input);
  return grad_input;
}

std::vector<double> fgsm(const NetworkParams& params, const ArchitectureSpec& arch, std::span<const double> x,
                         std::size_t label, const AttackConfig& cfg, const LossSpec& loss) {
  cfg.validate();
  const auto boxes = feasible_boxes(x, cfg);
  std::vector<double> adv(x.begin(), x.end());
  if (cfg.epsilon == 0.0) return adv;
  signed_step(adv, input_gradient(params, arch, x, label, loss), cfg.epsilon, boxes);
  return adv;
}

std::vector<double> pgd(const NetworkParams& params, const ArchitectureSpec& arch, std::span<const double> x,
                        std::size_t label, const AttackConfig& cfg, const LossSpec& loss) {
  cfg.validate();
  const auto boxes = feasible_boxes(x, cfg);
  std::vector<double> adv(x.begin(), x.end());
  if (cfg.epsilon == 0.0) return adv;
  for (std::size_t it = 0; it < cfg.max_iters; ++it)
    signed_step(adv, input_gradient(params, arch, adv, label, loss), cfg.step_size, boxes);
  return adv;
}

std::vector<double> attack(const NetworkParams& params, const ArchitectureSpec& arch, std::span<const double> x,
                           std::size_t label, const AttackConfig& cfg, const LossSpec& loss) {
  return cfg.kind == AttackKind::fgsm ? fgsm(params, arch, x, label, cfg, loss)
                                      : pgd(params, arch, x, label, cfg, loss);
}

Dataset adversarial_trainset(const NetworkParams& surrogate, const ArchitectureSpec& arch, const Dataset& data,
                             const AttackConfig& cfg) {
  Dataset out = data;
  if (cfg.epsilon > 0.0) out.provenance = Provenance::attacked;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto adv = attack(surrogate, arch, data.row(i), data.labels[i], cfg);
    std::copy(adv.begin(), adv.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace rsdnet
