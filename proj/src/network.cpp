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

#include "rsdnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rsdnet/divergence.hpp"
#include "rsdnet/rng.hpp"

namespace rsdnet {

namespace {

double activate(Activation act, double s) {
  switch (act) {
    case Activation::relu: return s > 0.0 ? s : 0.0;
    case Activation::tanh: return std::tanh(s);
    case Activation::identity: return s;
  }
  return s;
}

// Derivative expressed through the pre-activation s and the output y.
double activate_derivative(Activation act, double s, double y) {
  switch (act) {
    case Activation::relu: return s > 0.0 ? 1.0 : 0.0;
    case Activation::tanh: return 1.0 - y * y;
    case Activation::identity: return 1.0;
  }
  return 1.0;
}

}  // namespace

std::string to_string(Activation act) {
  switch (act) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::identity: return "identity";
  }
  return "unknown";
}

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "identity") return Activation::identity;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

void ArchitectureSpec::validate() const {
  if (input_dim < 1) throw std::invalid_argument("architecture: input_dim must be >= 1");
  if (output_classes < 2) throw std::invalid_argument("architecture: need at least two output classes");
  for (const auto& layer : hidden)
    if (layer.width < 1) throw std::invalid_argument("architecture: layer widths must be >= 1");
}

std::vector<LayerShape> shape_map(const ArchitectureSpec& arch) {
  arch.validate();
  std::vector<LayerShape> shapes;
  shapes.reserve(arch.layer_count());
  std::size_t cols = arch.input_dim, offset = 0;
  for (const auto& layer : arch.hidden) {
    shapes.push_back({layer.width, cols, offset});
    offset += shapes.back().size();
    cols = layer.width;
  }
  shapes.push_back({arch.learned_logits(), cols, offset});
  return shapes;
}

NetworkParams zero_params(const ArchitectureSpec& arch) {
  NetworkParams params;
  params.shapes = shape_map(arch);
  const auto& last = params.shapes.back();
  params.flat.assign(last.offset + last.size(), 0.0);
  return params;
}

NetworkParams make_params(const ArchitectureSpec& arch, std::vector<double> flat) {
  NetworkParams params = zero_params(arch);
  if (flat.size() != params.flat.size())
    throw std::invalid_argument("make_params: expected " + std::to_string(params.flat.size()) +
                                " parameters, got " + std::to_string(flat.size()));
  params.flat = std::move(flat);
  return params;
}

std::vector<DenseLayer> unflatten(const NetworkParams& params) {
  std::vector<DenseLayer> layers;
  for (const auto& shape : params.shapes) {
    DenseLayer layer{shape.rows, shape.cols, std::vector<double>(shape.rows * shape.cols),
                     std::vector<double>(shape.rows)};
    for (std::size_t r = 0; r < shape.rows; ++r) {
      layer.bias[r] = params.flat.at(shape.bias_index(r));
      for (std::size_t c = 0; c < shape.cols; ++c)
        layer.weights[r * shape.cols + c] = params.flat.at(shape.weight_index(r, c));
    }
    layers.push_back(std::move(layer));
  }
  return layers;
}

NetworkParams flatten(const std::vector<DenseLayer>& layers) {
  NetworkParams params;
  std::size_t offset = 0;
  for (const auto& layer : layers) {
    if (layer.weights.size() != layer.rows * layer.cols || layer.bias.size() != layer.rows)
      throw std::invalid_argument("flatten: inconsistent layer buffers");
    LayerShape shape{layer.rows, layer.cols, offset};
    params.flat.resize(offset + shape.size());
    for (std::size_t r = 0; r < layer.rows; ++r) {
      params.flat[shape.bias_index(r)] = layer.bias[r];
      for (std::size_t c = 0; c < layer.cols; ++c)
        params.flat[shape.weight_index(r, c)] = layer.weights[r * layer.cols + c];
    }
    params.shapes.push_back(shape);
    offset += shape.size();
  }
  return params;
}

std::string to_string(InitScheme scheme) {
  return scheme == InitScheme::glorot_normal ? "glorot_normal" : "he_uniform";
}

InitScheme parse_init_scheme(const std::string& name) {
  if (name == "glorot_normal" || name == "glorot") return InitScheme::glorot_normal;
  if (name == "he_uniform" || name == "he") return InitScheme::he_uniform;
  throw std::invalid_argument("unknown init scheme '" + name + "'");
}

NetworkParams init_params(const ArchitectureSpec& arch, InitScheme scheme, std::uint64_t seed) {
  NetworkParams params = zero_params(arch);
  Rng rng(seed);
  for (std::size_t l = 0; l < params.shapes.size(); ++l) {
    const auto& shape = params.shapes[l];
    const double fan_in = static_cast<double>(shape.cols);
    // a pinned logit still counts towards fan_out
    const double fan_out =
        static_cast<double>(l + 1 == params.shapes.size() ? arch.output_classes : shape.rows);
    const double stddev = std::sqrt(2.0 / (fan_in + fan_out));
    const double limit = std::sqrt(6.0 / fan_in);
    for (std::size_t r = 0; r < shape.rows; ++r)
      for (std::size_t c = 0; c < shape.cols; ++c)
        params.flat[shape.weight_index(r, c)] =
            scheme == InitScheme::glorot_normal ? stddev * rng.normal() : rng.uniform(-limit, limit);
  }
  return params;
}

ForwardTrace forward(const NetworkParams& params, const ArchitectureSpec& arch, std::span<const double> x) {
  if (x.size() != arch.input_dim) throw std::invalid_argument("forward: input has wrong dimension");
  if (params.shapes.size() != arch.layer_count()) throw std::invalid_argument("forward: parameters do not match architecture");
  ForwardTrace trace;
  trace.activations.reserve(arch.layer_count());
  trace.pre_activations.reserve(arch.hidden.size());
  trace.activations.emplace_back(x.begin(), x.end());

  const double* w = params.flat.data();
  for (std::size_t l = 0; l < arch.layer_count(); ++l) {
    const auto& shape = params.shapes[l];
    const auto& in = trace.activations.back();
    std::vector<double> out(shape.rows);
    for (std::size_t r = 0; r < shape.rows; ++r) {
      const double* row = w + shape.bias_index(r);
      double s = row[0];
      for (std::size_t c = 0; c < shape.cols; ++c) s += row[1 + c] * in[c];
      out[r] = s;
    }
    if (l < arch.hidden.size()) {
      std::vector<double> act(out.size());
      for (std::size_t r = 0; r < out.size(); ++r) act[r] = activate(arch.hidden[l].activation, out[r]);
      trace.pre_activations.push_back(std::move(out));
      trace.activations.push_back(std::move(act));
    } else {
      if (arch.pin_last_logit) out.push_back(0.0);
      trace.logits = std::move(out);
    }
  }
  trace.probs = softmax(trace.logits);
  return trace;
}

void backward_accumulate(const ForwardTrace& trace, const NetworkParams& params, const ArchitectureSpec& arch,
                         std::span<const double> grad_logits, double scale, std::span<double> grad_params,
                         std::span<double> grad_input) {
  if (grad_logits.size() != arch.output_classes || trace.logits.size() != arch.output_classes ||
      trace.activations.size() != arch.layer_count() || grad_params.size() != params.flat.size())
    throw std::invalid_argument("backward: trace or gradient shape mismatch");

  std::vector<double> delta(grad_logits.begin(), grad_logits.begin() + static_cast<std::ptrdiff_t>(arch.learned_logits()));
  for (double& d : delta) d *= scale;

  const double* w = params.flat.data();
  for (std::size_t l = arch.layer_count(); l-- > 0;) {
    const auto& shape = params.shapes[l];
    const auto& in = trace.activations[l];
    const bool need_prev = l > 0 || !grad_input.empty();
    std::vector<double> prev(need_prev ? shape.cols : 0, 0.0);
    for (std::size_t r = 0; r < shape.rows; ++r) {
      const double d = delta[r];
      if (d == 0.0) continue;
      double* g = grad_params.data() + shape.bias_index(r);
      const double* row = w + shape.bias_index(r);
      g[0] += d;
      for (std::size_t c = 0; c < shape.cols; ++c) g[1 + c] += d * in[c];
      if (need_prev)
        for (std::size_t c = 0; c < shape.cols; ++c) prev[c] += d * row[1 + c];
    }
    if (l == 0) {
      if (!grad_input.empty()) {
        if (grad_input.size() != shape.cols) throw std::invalid_argument("backward: input gradient has wrong size");
        for (std::size_t c = 0; c < shape.cols; ++c) grad_input[c] += prev[c];
      }
      break;
    }
    const auto act = arch.hidden[l - 1].activation;
    const auto& pre = trace.pre_activations[l - 1];
    for (std::size_t c = 0; c < prev.size(); ++c) prev[c] *= activate_derivative(act, pre[c], in[c]);
    delta = std::move(prev);
  }
}

Gradients backward(const ForwardTrace& trace, const NetworkParams& params, const ArchitectureSpec& arch,
                   std::span<const double> grad_logits) {
  Gradients grads{std::vector<double>(params.flat.size(), 0.0), std::vector<double>(arch.input_dim, 0.0)};
  backward_accumulate(trace, params, arch, grad_logits, 1.0, grads.params, grads.input);
  return grads;
}

std::size_t predict(const NetworkParams& params, const ArchitectureSpec& arch, std::span<const double> x) {
  const auto trace = forward(params, arch, x);
  return static_cast<std::size_t>(std::max_element(trace.probs.begin(), trace.probs.end()) - trace.probs.begin());
}

std::string to_string(ExampleModel model) {
  switch (model) {
    case ExampleModel::m1: return "M1";
    case ExampleModel::m2: return "M2";
    case ExampleModel::m3: return "M3";
  }
  return "unknown";
}

ExampleModel parse_example_model(const std::string& name) {
  if (name == "M1" || name == "m1") return ExampleModel::m1;
  if (name == "M2" || name == "m2") return ExampleModel::m2;
  if (name == "M3" || name == "m3") return ExampleModel::m3;
  throw std::invalid_argument("unknown example model '" + name + "'");
}

ArchitectureSpec example_model(ExampleModel model) {
  ArchitectureSpec arch;
  arch.input_dim = 1;
  arch.output_classes = 2;
  arch.pin_last_logit = true;
  switch (model) {
    case ExampleModel::m1: break;
    case ExampleModel::m2: arch.hidden = {{2, Activation::relu}}; break;
    case ExampleModel::m3: arch.hidden = {{2, Activation::tanh}}; break;
  }
  return arch;
}

}  // namespace rsdnet
