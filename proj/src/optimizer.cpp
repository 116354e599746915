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

#include "rsdnet/optimizer.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "rsdnet/rng.hpp"

namespace rsdnet {

void AdamConfig::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("adam: alpha must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw std::invalid_argument("adam: moment decay rates must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("adam: epsilon must be positive");
}

AdamState AdamState::zeros(std::size_t parameter_count) {
  return {std::vector<double>(parameter_count, 0.0), std::vector<double>(parameter_count, 0.0), 0};
}

void adam_step(AdamState& state, const AdamConfig& config, std::span<double> params, std::span<const double> grad) {
  if (params.size() != grad.size() || state.m.size() != params.size() || state.v.size() != params.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double m_correction = 1.0 - std::pow(config.beta1, t);
  const double v_correction = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * grad[i];
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / m_correction;
    const double v_hat = state.v[i] / v_correction;
    params[i] -= config.alpha * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("train: batch size must be >= 1");
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t shuffle_seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(shuffle_seed + epoch);
  rng.shuffle(std::span<std::size_t>(order));
  return order;
}

BatchGradient batch_gradient(const NetworkParams& params, const ArchitectureSpec& arch, const Dataset& data,
                             std::span<const std::size_t> batch, const LossSpec& loss) {
  std::vector<ForwardTrace> traces;
  traces.reserve(batch.size());
  std::vector<std::vector<double>> probs;
  probs.reserve(batch.size());
  std::vector<std::size_t> labels;
  labels.reserve(batch.size());
  for (std::size_t idx : batch) {
    traces.push_back(forward(params, arch, data.row(idx)));
    probs.push_back(traces.back().probs);
    labels.push_back(data.labels[idx]);
  }
  const BatchLoss agg = batch_loss(loss, labels, probs);

  BatchGradient out{std::vector<double>(params.size(), 0.0), agg.aggregate};
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (agg.weights[i] == 0.0) continue;
    const auto grad_logits =
        softmax_pullback(probs[i], example_loss_grad_probs(loss, labels[i], probs[i]));
    backward_accumulate(traces[i], params, arch, grad_logits, agg.weights[i], out.grad, {});
  }
  return out;
}

double accuracy(const NetworkParams& params, const ArchitectureSpec& arch, const Dataset& data) {
  if (data.size() == 0) return std::numeric_limits<double>::quiet_NaN();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (predict(params, arch, data.row(i)) == data.labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

TrainResult train(const Dataset& data, const ArchitectureSpec& arch, const TrainConfig& config,
                  const AdamConfig& adam, const Dataset* held_out) {
  config.validate();
  adam.validate();
  arch.validate();
  if (data.size() == 0) throw std::invalid_argument("train: empty dataset");
  data.validate();
  if (data.dim != arch.input_dim || data.classes != arch.output_classes)
    throw std::invalid_argument("train: dataset does not match the architecture");

  TrainResult result{init_params(arch, config.init, config.init_seed), {}};
  AdamState state = AdamState::zeros(result.params.size());
  const std::size_t n = data.size();

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto order = epoch_order(n, config.shuffle_seed, epoch);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t stop = std::min(n, start + config.batch_size);
      const std::span<const std::size_t> batch(order.data() + start, stop - start);
      const auto bg = batch_gradient(result.params, arch, data, batch, config.loss);
      adam_step(state, adam, result.params.flat, bg.grad);
      loss_sum += bg.loss * static_cast<double>(batch.size());
    }
    EpochMetrics metrics{epoch + 1, loss_sum / static_cast<double>(n), std::numeric_limits<double>::quiet_NaN()};
    if (held_out != nullptr) metrics.test_accuracy = accuracy(result.params, arch, *held_out);
    result.trace.push_back(metrics);
  }
  return result;
}

void write_metrics(const std::vector<EpochMetrics>& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "epoch,train_loss,test_accuracy\n";
  for (const auto& m : trace)
    out << m.epoch << ',' << format_real(m.train_loss) << ',' << format_real(m.test_accuracy) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace rsdnet
