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

#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include "rsdnet/contamination.hpp"
#include "rsdnet/rng.hpp"

using namespace rsdnet;

namespace {

Dataset labels_only(std::size_t n, std::size_t J, std::uint64_t seed) {
  Dataset d;
  d.dim = 1;
  d.classes = J;
  d.features.assign(n, 0.0);
  Rng rng(seed);
  // skewed clean distribution so the noisy target is not trivially uniform
  for (std::size_t i = 0; i < n; ++i) d.labels.push_back(rng.uniform() < 0.5 ? 0 : rng.below(J));
  return d;
}

}  // namespace

TEST(Corruption, ZeroEtaIsIdentity) {
  const auto d = labels_only(1000, 10, 1);
  const auto c = corrupt_labels(d, {0.0, 3});
  EXPECT_EQ(c.data.labels, d.labels);
  EXPECT_EQ(c.data.features, d.features);
  for (auto m : c.flip_mask) EXPECT_EQ(m, 0);
}

TEST(Corruption, FlipFractionAndNoSelfFlips) {
  const auto d = labels_only(100000, 10, 2);
  const auto c = corrupt_labels(d, {0.4, 7});
  std::size_t flips = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (c.flip_mask[i]) {
      ++flips;
      EXPECT_NE(c.data.labels[i], d.labels[i]);
    } else {
      EXPECT_EQ(c.data.labels[i], d.labels[i]);
    }
    EXPECT_LT(c.data.labels[i], 10u);
  }
  EXPECT_NEAR(static_cast<double>(flips) / d.size(), 0.4, 0.01);
  EXPECT_EQ(c.data.provenance, Provenance::corrupted);
}

TEST(Corruption, DeterministicMask) {
  const auto d = labels_only(5000, 4, 3);
  EXPECT_EQ(corrupt_labels(d, {0.3, 11}).flip_mask, corrupt_labels(d, {0.3, 11}).flip_mask);
  EXPECT_NE(corrupt_labels(d, {0.3, 11}).flip_mask, corrupt_labels(d, {0.3, 12}).flip_mask);
  EXPECT_THROW(corrupt_labels(d, {1.0, 1}), std::invalid_argument);
  EXPECT_THROW(corrupt_labels(d, {-0.1, 1}), std::invalid_argument);
}

TEST(Corruption, LabelDistributionMatchesNoisyPosterior) {
  const std::size_t J = 10, n = 100000;
  const double eta = 0.4;
  const auto d = labels_only(n, J, 4);
  std::vector<double> clean(J, 0.0), noisy(J, 0.0);
  for (auto y : d.labels) clean[y] += 1.0 / n;
  const auto c = corrupt_labels(d, {eta, 99});
  for (auto y : c.data.labels) noisy[y] += 1.0;
  const auto expected = noisy_posterior(ProbVector(clean), eta);
  double stat = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    const double e = expected[j] * n;
    stat += (noisy[j] - e) * (noisy[j] - e) / e;
  }
  const boost::math::chi_squared dist(static_cast<double>(J - 1));
  EXPECT_GT(boost::math::cdf(boost::math::complement(dist, stat)), 1e-4) << "chi2 = " << stat;
}

TEST(NoisyPosterior, WorkedValuesAndFixedPoints) {
  const auto p = noisy_posterior(ProbVector({0.9, 0.1}), 0.2);
  EXPECT_NEAR(p[0], 0.74, 1e-15);
  EXPECT_NEAR(p[1], 0.26, 1e-15);
  const ProbVector q({0.2, 0.5, 0.3});
  const auto same = noisy_posterior(q, 0.0);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(same[j], q[j]);
  for (double eta : {0.1, 0.5, 0.8}) {
    const auto u = noisy_posterior(ProbVector::uniform(5), eta);
    for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(u[j], 0.2, 1e-15);
  }
}

TEST(NoisyPosterior, SumsToOne) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t J = 2 + rng.below(9);
    std::vector<double> p(J);
    double s = 0.0;
    for (auto& v : p) s += (v = rng.uniform());
    for (auto& v : p) v /= s;
    const auto out = noisy_posterior(ProbVector(p), rng.uniform(0.0, 0.9));
    double t = 0.0;
    for (std::size_t j = 0; j < J; ++j) t += out[j];
    EXPECT_NEAR(t, 1.0, 1e-12);
  }
}
