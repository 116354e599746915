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

#include "rsdnet/contamination.hpp"

#include <stdexcept>

#include "rsdnet/rng.hpp"

namespace rsdnet {

CorruptedDataset corrupt_labels(const Dataset& data, const NoiseConfig& cfg) {
  if (data.classes < 2) throw std::invalid_argument("corrupt_labels: need at least two classes");
  if (!(cfg.eta >= 0.0 && cfg.eta < 1.0)) throw std::invalid_argument("corrupt_labels: eta must lie in [0, 1)");
  CorruptedDataset out{data, std::vector<std::uint8_t>(data.size(), 0)};
  if (cfg.eta > 0.0) out.data.provenance = Provenance::corrupted;
  Rng rng(cfg.seed);
  const std::uint64_t others = data.classes - 1;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const bool flip = rng.uniform() < cfg.eta;
    const auto k = static_cast<std::size_t>(rng.below(others));
    if (!flip) continue;
    const std::size_t y = data.labels[i];
    out.data.labels[i] = k < y ? k : k + 1;
    out.flip_mask[i] = 1;
  }
  return out;
}

ProbVector noisy_posterior(const ProbVector& p_star, double eta) {
  if (!(eta >= 0.0 && eta < 1.0)) throw std::invalid_argument("noisy_posterior: eta must lie in [0, 1)");
  const std::size_t J = p_star.size();
  if (J < 2) throw std::invalid_argument("noisy_posterior: need at least two classes");
  std::vector<double> out(J);
  const double spill = eta / static_cast<double>(J - 1);
  for (std::size_t j = 0; j < J; ++j) out[j] = (1.0 - eta) * p_star[j] + spill * (1.0 - p_star[j]);
  return ProbVector(std::move(out));
}

}  // namespace rsdnet
