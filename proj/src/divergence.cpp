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

#include "rsdnet/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace rsdnet {

namespace {

std::string describe_pair(double beta, double lambda) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "(beta=%g, lambda=%g)", beta, lambda);
  return buf;
}

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

std::string to_string(TuningRejection reason) {
  switch (reason) {
    case TuningRejection::a_nonpositive: return "a_nonpositive";
    case TuningRejection::b_nonpositive: return "b_nonpositive";
    case TuningRejection::beta_out_of_range: return "beta_out_of_range";
  }
  return "unknown";
}

TuningError::TuningError(TuningRejection reason, double beta, double lambda)
    : std::invalid_argument("inadmissible tuning pair " + describe_pair(beta, lambda) + ": " +
                            to_string(reason)),
      reason_(reason) {}

std::optional<TuningRejection> TuningPair::check(double beta, double lambda) {
  if (!(beta >= 0.0 && beta <= 1.0)) return TuningRejection::beta_out_of_range;
  if (beta == 1.0) return std::nullopt;
  const double a = 1.0 + lambda * (1.0 - beta);
  const double b = beta - lambda * (1.0 - beta);
  if (!(a > 0.0)) return TuningRejection::a_nonpositive;
  if (!(b > 0.0)) return TuningRejection::b_nonpositive;
  return std::nullopt;
}

TuningPair TuningPair::make(double beta, double lambda) {
  if (!std::isfinite(lambda)) throw std::invalid_argument("tuning lambda must be finite");
  if (auto reason = check(beta, lambda)) throw TuningError(*reason, beta, lambda);
  if (beta == 1.0) return TuningPair(beta, lambda, 1.0, 1.0);
  return TuningPair(beta, lambda, 1.0 + lambda * (1.0 - beta), beta - lambda * (1.0 - beta));
}

ProbVector::ProbVector(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw std::invalid_argument("ProbVector: empty");
  double sum = 0.0;
  for (double v : probs_) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("ProbVector: entry outside [0, 1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("ProbVector: entries do not sum to 1");
}

ProbVector ProbVector::uniform(std::size_t classes) {
  return ProbVector(std::vector<double>(classes, 1.0 / static_cast<double>(classes)));
}

ProbVector ProbVector::vertex(std::size_t classes, std::size_t index) {
  std::vector<double> p(classes, 0.0);
  p.at(index) = 1.0;
  return ProbVector(std::move(p));
}

OneHotLabel::OneHotLabel(std::size_t index, std::size_t dim) : class_index(index), dimension(dim) {
  if (index >= dim) throw std::invalid_argument("OneHotLabel: class index out of range");
}

double sd_loss(const OneHotLabel& u, std::span<const double> p, const TuningPair& t) {
  require_same_size(u.dimension, p.size(), "sd_loss");
  const double beta = t.beta(), a = t.a(), b = t.b();
  double total = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    double term = std::pow(p[j], 1.0 + beta) + a / b;
    if (j == u.class_index) term -= (1.0 + beta) / b * std::pow(p[j], b);
    total += term;
  }
  return total / a;
}

std::vector<double> clamp_probs(std::span<const double> p) {
  std::vector<double> out(p.begin(), p.end());
  for (double& v : out) v = std::clamp(v, kProbClip, 1.0 - kProbClip);
  return out;
}

std::vector<double> sd_loss_grad_probs(const OneHotLabel& u, std::span<const double> p,
                                       const TuningPair& t) {
  require_same_size(u.dimension, p.size(), "sd_loss_grad_probs");
  const auto pc = clamp_probs(p);
  const double beta = t.beta(), scale = (1.0 + beta) / t.a();
  std::vector<double> grad(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    double g = std::pow(pc[j], beta);
    if (j == u.class_index) g -= std::pow(pc[j], t.b() - 1.0);
    grad[j] = scale * g;
  }
  return grad;
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("softmax: empty logits");
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    p[j] = std::exp(logits[j] - top);
    sum += p[j];
  }
  for (double& v : p) v /= sum;
  return p;
}

std::vector<double> softmax_pullback(std::span<const double> probs, std::span<const double> grad_probs) {
  require_same_size(probs.size(), grad_probs.size(), "softmax_pullback");
  const double mean = std::inner_product(probs.begin(), probs.end(), grad_probs.begin(), 0.0);
  std::vector<double> out(probs.size());
  for (std::size_t j = 0; j < probs.size(); ++j) out[j] = probs[j] * (grad_probs[j] - mean);
  return out;
}

std::vector<double> sd_loss_grad_logits(const OneHotLabel& u, std::span<const double> logits,
                                        const TuningPair& t) {
  require_same_size(u.dimension, logits.size(), "sd_loss_grad_logits");
  const auto p = softmax(logits);
  return softmax_pullback(p, sd_loss_grad_probs(u, p, t));
}

double conditional_sd_risk(std::span<const double> p_star, std::span<const double> p,
                           const TuningPair& t) {
  require_same_size(p_star.size(), p.size(), "conditional_sd_risk");
  const double beta = t.beta(), a = t.a(), b = t.b();
  double total = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    total += std::pow(p[j], 1.0 + beta) -
             (1.0 + beta) / b * std::pow(p[j], b) * std::pow(p_star[j], a) +
             a / b * std::pow(p_star[j], 1.0 + beta);
  }
  return total / a;
}

LossBounds loss_bounds(const TuningPair& t, std::size_t classes) {
  if (classes < 2) throw std::invalid_argument("loss_bounds: need at least two classes");
  const double J = static_cast<double>(classes);
  const double beta = t.beta(), a = t.a(), b = t.b();
  const double power_sum_edge = std::pow(J, 1.0 - b);
  const double cross = (1.0 + beta) / (a * b);
  return {std::pow(J, 1.0 - beta) / a - cross * std::max(1.0, power_sum_edge) + J * J / b,
          J / a - cross * std::min(1.0, power_sum_edge) + J * J / b};
}

LossSpec LossSpec::sd(const TuningPair& t) { return LossSpec(Kind::sd, t, 0.0); }
LossSpec LossSpec::cce() { return LossSpec(Kind::cce, std::nullopt, 0.0); }
LossSpec LossSpec::mae() { return LossSpec(Kind::mae, std::nullopt, 0.0); }

LossSpec LossSpec::gce(double q) {
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("gce: q must lie in (0, 1]");
  return LossSpec(Kind::gce, std::nullopt, q);
}

LossSpec LossSpec::tcce(double delta) {
  if (!(delta >= 0.0 && delta < 1.0)) throw std::invalid_argument("tcce: delta must lie in [0, 1)");
  return LossSpec(Kind::tcce, std::nullopt, delta);
}

const TuningPair& LossSpec::tuning() const {
  if (!tuning_) throw std::logic_error("LossSpec::tuning: not an S-divergence loss");
  return *tuning_;
}

std::string LossSpec::name() const {
  switch (kind_) {
    case Kind::sd: return "sd(" + fmt_g(tuning_->beta()) + "," + fmt_g(tuning_->lambda()) + ")";
    case Kind::cce: return "cce";
    case Kind::mae: return "mae";
    case Kind::gce: return "gce(" + fmt_g(param_) + ")";
    case Kind::tcce: return "tcce(" + fmt_g(param_) + ")";
  }
  return "unknown";
}

double example_loss(const LossSpec& loss, std::size_t label, std::span<const double> probs) {
  if (label >= probs.size()) throw std::invalid_argument("example_loss: label out of range");
  const double py = std::max(probs[label], kProbClip);
  switch (loss.kind()) {
    case LossSpec::Kind::sd: return sd_loss(OneHotLabel(label, probs.size()), probs, loss.tuning());
    case LossSpec::Kind::cce:
    case LossSpec::Kind::tcce: return -std::log(py);
    case LossSpec::Kind::mae: {
      double total = 0.0;
      for (std::size_t j = 0; j < probs.size(); ++j) total += std::abs((j == label ? 1.0 : 0.0) - probs[j]);
      return total;
    }
    case LossSpec::Kind::gce: return (1.0 - std::pow(py, loss.q())) / loss.q();
  }
  return 0.0;
}

std::vector<double> example_loss_grad_probs(const LossSpec& loss, std::size_t label,
                                            std::span<const double> probs) {
  if (label >= probs.size()) throw std::invalid_argument("example_loss_grad_probs: label out of range");
  const double py = std::max(probs[label], kProbClip);
  std::vector<double> grad(probs.size(), 0.0);
  switch (loss.kind()) {
    case LossSpec::Kind::sd: return sd_loss_grad_probs(OneHotLabel(label, probs.size()), probs, loss.tuning());
    case LossSpec::Kind::cce:
    case LossSpec::Kind::tcce: grad[label] = -1.0 / py; break;
    case LossSpec::Kind::mae:
      // subgradient of |y_j - p_j|; off-label entries sit at p_j >= 0
      std::fill(grad.begin(), grad.end(), 1.0);
      grad[label] = -1.0;
      break;
    case LossSpec::Kind::gce: grad[label] = -std::pow(py, loss.q() - 1.0); break;
  }
  return grad;
}

BatchLoss batch_loss(const LossSpec& loss, std::span<const std::size_t> labels,
                     std::span<const std::vector<double>> probs) {
  require_same_size(labels.size(), probs.size(), "batch_loss");
  const std::size_t m = labels.size();
  BatchLoss out;
  if (m == 0) return out;
  out.per_example.resize(m);
  for (std::size_t i = 0; i < m; ++i) out.per_example[i] = example_loss(loss, labels[i], probs[i]);

  out.weights.assign(m, 1.0 / static_cast<double>(m));
  if (loss.kind() == LossSpec::Kind::tcce) {
    // 1e-9 guards ceil against products like 0.3 * 10 = 3.0000000000000004
    auto trimmed = static_cast<std::size_t>(std::ceil(loss.delta() * static_cast<double>(m) - 1e-9));
    trimmed = std::min(trimmed, m - 1);
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return out.per_example[x] > out.per_example[y];
    });
    const double kept_weight = 1.0 / static_cast<double>(m - trimmed);
    for (std::size_t r = 0; r < m; ++r) out.weights[order[r]] = r < trimmed ? 0.0 : kept_weight;
  }
  for (std::size_t i = 0; i < m; ++i) out.aggregate += out.weights[i] * out.per_example[i];
  return out;
}

}  // namespace rsdnet
