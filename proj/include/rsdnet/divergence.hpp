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
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rsdnet {

/// Lower clamp applied to model probabilities before losses that contain
/// negative powers or logarithms. The upper clamp is 1 - kProbClip.
inline constexpr double kProbClip = 1e-7;

enum class TuningRejection { a_nonpositive, b_nonpositive, beta_out_of_range };

std::string to_string(TuningRejection reason);

class TuningError : public std::invalid_argument {
 public:
  TuningError(TuningRejection reason, double beta, double lambda);
  TuningRejection reason() const noexcept { return reason_; }

 private:
  TuningRejection reason_;
};

/// An admissible S-divergence tuning pair (beta, lambda) together with the
/// derived exponents A = 1 + lambda (1 - beta) and B = beta - lambda (1 - beta).
/// Admissible means A > 0 and B > 0 with 0 <= beta < 1, or beta == 1 with any
/// lambda (the squared L2 distance, where A = B = 1).
class TuningPair {
 public:
  /// Throws TuningError for pairs outside the admissible set and
  /// std::invalid_argument for a non-finite lambda.
  static TuningPair make(double beta, double lambda);

  /// Reason the pair would be rejected, or nullopt if admissible.
  static std::optional<TuningRejection> check(double beta, double lambda);

  double beta() const noexcept { return beta_; }
  double lambda() const noexcept { return lambda_; }
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }

 private:
  TuningPair(double beta, double lambda, double a, double b)
      : beta_(beta), lambda_(lambda), a_(a), b_(b) {}

  double beta_;
  double lambda_;
  double a_;
  double b_;
};

/// A point of the probability simplex.
class ProbVector {
 public:
  /// Validates entries in [0, 1] summing to 1 within 1e-9.
  explicit ProbVector(std::vector<double> probs);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t j) const { return probs_[j]; }
  std::span<const double> values() const noexcept { return probs_; }

  static ProbVector uniform(std::size_t classes);
  static ProbVector vertex(std::size_t classes, std::size_t index);

 private:
  std::vector<double> probs_;
};

struct OneHotLabel {
  std::size_t class_index;
  std::size_t dimension;

  OneHotLabel(std::size_t index, std::size_t dim);
  double operator[](std::size_t j) const { return j == class_index ? 1.0 : 0.0; }
};

/// Per-example S-divergence training loss
///   (1/A) sum_j [ p_j^{1+beta} - ((1+beta)/B) u_j p_j^B + A/B ].
/// Evaluated on the closed simplex with 0^B = 0; no clamping is applied.
double sd_loss(const OneHotLabel& u, std::span<const double> p, const TuningPair& t);

/// d sd_loss / d p_j = ((1+beta)/A) [p_j^beta - u_j p_j^{B-1}], evaluated at
/// p clamped to [kProbClip, 1 - kProbClip].
std::vector<double> sd_loss_grad_probs(const OneHotLabel& u, std::span<const double> p,
                                       const TuningPair& t);

/// Chain rule through a numerically stable softmax.
std::vector<double> sd_loss_grad_logits(const OneHotLabel& u, std::span<const double> logits,
                                        const TuningPair& t);

/// Conditional SD-risk r(p*, p), the S-divergence between p* and p.
double conditional_sd_risk(std::span<const double> p_star, std::span<const double> p,
                           const TuningPair& t);

struct LossBounds {
  double lower;
  double upper;
};

/// Uniform bounds on sum_j loss(e_j, p) over the simplex, for J >= 2 classes.
LossBounds loss_bounds(const TuningPair& t, std::size_t classes);

/// Training-loss selector shared by the optimizer, attacks and CLI.
class LossSpec {
 public:
  enum class Kind { sd, cce, mae, gce, tcce };

  static LossSpec sd(const TuningPair& t);
  static LossSpec cce();
  static LossSpec mae();
  /// q in (0, 1]
  static LossSpec gce(double q);
  /// trimming proportion delta in [0, 1)
  static LossSpec tcce(double delta);

  Kind kind() const noexcept { return kind_; }
  const TuningPair& tuning() const;
  double q() const noexcept { return param_; }
  double delta() const noexcept { return param_; }

  /// e.g. "sd(0.1,-0.5)", "gce(0.7)", "cce"
  std::string name() const;

 private:
  LossSpec(Kind kind, std::optional<TuningPair> tuning, double param)
      : kind_(kind), tuning_(tuning), param_(param) {}

  Kind kind_;
  std::optional<TuningPair> tuning_;
  double param_ = 0.0;
};

/// Element-wise probability clamp to [kProbClip, 1 - kProbClip].
std::vector<double> clamp_probs(std::span<const double> p);

/// Loss of a single example, without batch-level effects (TCCE reduces to CCE).
double example_loss(const LossSpec& loss, std::size_t label, std::span<const double> probs);

/// Gradient of example_loss with respect to the (unclamped) probabilities.
std::vector<double> example_loss_grad_probs(const LossSpec& loss, std::size_t label,
                                            std::span<const double> probs);

/// Pulls a probability gradient back through softmax: p * (g - <p, g>).
std::vector<double> softmax_pullback(std::span<const double> probs, std::span<const double> grad_probs);

std::vector<double> softmax(std::span<const double> logits);

struct BatchLoss {
  std::vector<double> per_example;
  /// Weight of each example in the aggregate; zero for trimmed examples.
  std::vector<double> weights;
  double aggregate = 0.0;
};

/// Per-example losses and the batch aggregate. All kinds average over the
/// batch; TCCE first discards the ceil(delta * m) largest per-example losses
/// (at most m - 1 of them).
BatchLoss batch_loss(const LossSpec& loss, std::span<const std::size_t> labels,
                     std::span<const std::vector<double>> probs);

}  // namespace rsdnet
