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

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "rsdnet/divergence.hpp"
#include "rsdnet/network.hpp"

namespace rsdnet {

/// Raised when a numerical routine cannot produce a trustworthy result.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Excess-risk bound under uniform label noise,
///   eta / (J-1-J eta) * (1/A) * (J - J^{1-beta} + ((1+beta)/B) |1 - J^{1-B}|).
/// Requires 0 <= eta < (J-1)/J; throws std::domain_error otherwise.
double excess_risk_bound(const TuningPair& t, double eta, std::size_t classes);

struct GridAxis {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t points = 2;

  /// lo + (hi - lo) * i / (points - 1); a single point yields lo.
  std::vector<double> values() const;
};

struct BoundGrid {
  std::vector<double> betas;
  std::vector<double> lambdas;
  double eta = 0.0;
  std::size_t classes = 0;
  /// Beta-major; nullopt marks a cell outside the admissible set.
  std::vector<std::optional<double>> values;

  const std::optional<double>& at(std::size_t beta_index, std::size_t lambda_index) const {
    return values.at(beta_index * lambdas.size() + lambda_index);
  }
};

BoundGrid bound_grid(double eta, std::size_t classes, const GridAxis& beta, const GridAxis& lambda);

/// Long format "beta,lambda,value"; inadmissible cells carry NA.
void write_bound_grid(const BoundGrid& grid, const std::filesystem::path& path);

/// Scalar-feature true posterior.
using PosteriorFn = std::function<ProbVector(double)>;

/// (p*_1, 1 - p*_1) for the scalar benchmark posterior.
ProbVector example1_p_star(double x);

/// psi(x; theta) = sum_j u_j grad_theta p_j with
/// u_j = p_j^beta - (p*_j)^A p_j^{B-1}, evaluated as p_j^{B-1} (p_j^A - (p*_j)^A)
/// on probabilities clamped to [kProbClip, 1 - kProbClip].
std::vector<double> psi(const ArchitectureSpec& arch, const NetworkParams& params, std::span<const double> x,
                        const TuningPair& t, const ProbVector& p_star);

/// Hessian of the first logit with respect to the parameters. Supported for
/// pinned binary models with at most one hidden layer; throws
/// std::invalid_argument otherwise.
Eigen::MatrixXd logit_hessian(const ArchitectureSpec& arch, const NetworkParams& params, std::span<const double> x);

/// Sample points within 1e-6 of a ReLU kink of the model are moved by +1e-6.
std::vector<double> nudge_off_kinks(const ArchitectureSpec& arch, const NetworkParams& params,
                                    std::span<const double> sample);

/// Empirical mean over the scalar feature sample of grad_theta psi, i.e.
/// sum_j u'_j grad p_j grad p_j^T + u_j hess p_j.
Eigen::MatrixXd big_psi(const ArchitectureSpec& arch, const NetworkParams& params, const TuningPair& t,
                        std::span<const double> sample, const PosteriorFn& p_star);

struct PseudoInverse {
  Eigen::MatrixXd matrix;
  std::size_t rank = 0;
};

/// Moore-Penrose inverse via SVD; singular values below
/// max_singular * relative_cutoff are treated as zero.
PseudoInverse pseudo_inverse(const Eigen::MatrixXd& m, double relative_cutoff = 1e-10);

struct IFRequest {
  ExampleModel model = ExampleModel::m1;
  std::vector<double> theta_g;
  TuningPair tuning = TuningPair::make(0.5, -0.5);
  std::vector<double> x_grid;
  std::vector<double> feature_sample;
  PosteriorFn p_star = example1_p_star;
};

struct IFCurves {
  std::vector<double> x_grid;
  /// Row i holds the influence vector at x_grid[i].
  Eigen::MatrixXd values;
  std::size_t rank = 0;
};

/// n standard-normal draws standing in for the feature distribution.
std::vector<double> normal_feature_sample(std::size_t n, std::uint64_t seed);

/// IF(x_t) = -pinv(Psi(theta_g)) psi(x_t, theta_g), taking the minimum-norm
/// solution (zero kernel component). Throws NumericError when Psi or its
/// pseudoinverse is not finite.
IFCurves influence_function(const IFRequest& req);

/// Long format "x_t,component,value" with 1-based component indices.
void write_if_curves(const IFCurves& curves, const std::filesystem::path& path);

struct CalibrationResult {
  std::vector<double> argmin;
  double min_risk = 0.0;
  /// Second-smallest grid risk minus the smallest.
  double runner_up_gap = 0.0;
  std::size_t argmin_class = 0;
  std::size_t bayes_class = 0;
  double linf_to_p_star = 0.0;
  bool calibrated = false;
};

/// Minimizes r(p*, .) over the simplex grid {counts / steps}. J must be <= 4.
CalibrationResult calibration_check(const ProbVector& p_star, const TuningPair& t, std::size_t steps);

}  // namespace rsdnet
