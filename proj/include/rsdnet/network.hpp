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
#include <span>
#include <string>
#include <vector>

namespace rsdnet {

enum class Activation { relu, tanh, identity };

std::string to_string(Activation act);
Activation parse_activation(const std::string& name);

struct LayerSpec {
  std::size_t width;
  Activation activation;
};

/// Dense feed-forward classifier: input -> hidden layers -> affine logits ->
/// softmax. With pin_last_logit the final logit is the constant 0 and only
/// the first J-1 logits carry parameters.
struct ArchitectureSpec {
  std::size_t input_dim = 0;
  std::vector<LayerSpec> hidden;
  std::size_t output_classes = 0;
  bool pin_last_logit = false;

  /// Throws std::invalid_argument unless all widths >= 1 and J >= 2.
  void validate() const;
  std::size_t layer_count() const { return hidden.size() + 1; }
  std::size_t learned_logits() const { return pin_last_logit ? output_classes - 1 : output_classes; }
};

/// Shape of one affine layer inside the flat parameter vector. Each output
/// unit owns a contiguous row [bias, w_1, ..., w_cols].
struct LayerShape {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t offset = 0;

  std::size_t size() const { return rows * (cols + 1); }
  std::size_t bias_index(std::size_t r) const { return offset + r * (cols + 1); }
  std::size_t weight_index(std::size_t r, std::size_t c) const { return offset + r * (cols + 1) + 1 + c; }
};

std::vector<LayerShape> shape_map(const ArchitectureSpec& arch);

struct NetworkParams {
  std::vector<double> flat;
  std::vector<LayerShape> shapes;

  std::size_t size() const { return flat.size(); }
};

/// Zero parameters laid out for arch.
NetworkParams zero_params(const ArchitectureSpec& arch);
/// Wraps an explicit flat vector; throws if its length disagrees with arch.
NetworkParams make_params(const ArchitectureSpec& arch, std::vector<double> flat);

/// Matrix/bias view of one layer, used by flatten/unflatten.
struct DenseLayer {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> weights;  // row-major rows x cols
  std::vector<double> bias;
};

std::vector<DenseLayer> unflatten(const NetworkParams& params);
NetworkParams flatten(const std::vector<DenseLayer>& layers);

enum class InitScheme { glorot_normal, he_uniform };

std::string to_string(InitScheme scheme);
InitScheme parse_init_scheme(const std::string& name);

/// glorot_normal: N(0, 2/(fan_in+fan_out)); he_uniform: U(+-sqrt(6/fan_in)).
/// Biases are zero. Fully determined by the seed.
NetworkParams init_params(const ArchitectureSpec& arch, InitScheme scheme, std::uint64_t seed);

struct ForwardTrace {
  /// activations[0] is the input, activations[l+1] the output of hidden layer l.
  std::vector<std::vector<double>> activations;
  std::vector<std::vector<double>> pre_activations;
  std::vector<double> logits;
  std::vector<double> probs;
};

ForwardTrace forward(const NetworkParams& params, const ArchitectureSpec& arch, std::span<const double> x);

struct Gradients {
  std::vector<double> params;
  std::vector<double> input;
};

/// Exact backpropagation of d(loss)/d(logits). For a pinned last logit its
/// gradient entry is ignored. ReLU uses derivative 0 at exactly 0.
Gradients backward(const ForwardTrace& trace, const NetworkParams& params, const ArchitectureSpec& arch,
                   std::span<const double> grad_logits);

/// Accumulating variant: adds scale * d(loss)/d(params) into grad_params.
/// The input gradient is skipped when grad_input is empty.
void backward_accumulate(const ForwardTrace& trace, const NetworkParams& params, const ArchitectureSpec& arch,
                         std::span<const double> grad_logits, double scale, std::span<double> grad_params,
                         std::span<double> grad_input);

/// Index of the largest probability (first on ties).
std::size_t predict(const NetworkParams& params, const ArchitectureSpec& arch, std::span<const double> x);

/// The scalar-input binary models with one logit tied to zero:
///   M1: z = t1 + t2 x
///   M2: z = t5 + t6 relu(t1 + t2 x) + t7 relu(t3 + t4 x)
///   M3: as M2 with tanh.
enum class ExampleModel { m1, m2, m3 };

std::string to_string(ExampleModel model);
ExampleModel parse_example_model(const std::string& name);
ArchitectureSpec example_model(ExampleModel model);

}  // namespace rsdnet
