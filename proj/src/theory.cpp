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

#include "rsdnet/theory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "rsdnet/data_io.hpp"
#include "rsdnet/rng.hpp"

namespace rsdnet {

namespace {

void require_supported(const ArchitectureSpec& arch) {
  if (!arch.pin_last_logit || arch.output_classes != 2 || arch.input_dim != 1 || arch.hidden.size() > 1)
    throw std::invalid_argument(
        "second derivatives are only available for scalar-input binary models with a pinned logit and at most "
        "one hidden layer");
}

std::string full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool all_finite(const Eigen::MatrixXd& m) { return m.array().isFinite().all(); }

}  // namespace

double excess_risk_bound(const TuningPair& t, double eta, std::size_t classes) {
  if (classes < 2) throw std::domain_error("excess_risk_bound: need at least two classes");
  const double J = static_cast<double>(classes);
  if (!(eta >= 0.0 && eta < (J - 1.0) / J))
    throw std::domain_error("excess_risk_bound: eta must lie in [0, (J-1)/J)");
  const double beta = t.beta(), a = t.a(), b = t.b();
  const double tuning_part =
      (J - std::pow(J, 1.0 - beta) + (1.0 + beta) / b * std::abs(1.0 - std::pow(J, 1.0 - b))) / a;
  return eta / (J - 1.0 - J * eta) * tuning_part;
}

std::vector<double> GridAxis::values() const {
  if (points == 0) throw std::invalid_argument("grid axis needs at least one point");
  std::vector<double> out(points);
  if (points == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < points; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  return out;
}

BoundGrid bound_grid(double eta, std::size_t classes, const GridAxis& beta, const GridAxis& lambda) {
  BoundGrid grid{beta.values(), lambda.values(), eta, classes, {}};
  grid.values.reserve(grid.betas.size() * grid.lambdas.size());
  for (double b : grid.betas) {
    for (double l : grid.lambdas) {
      if (TuningPair::check(b, l) || !std::isfinite(l)) {
        grid.values.emplace_back(std::nullopt);
      } else {
        grid.values.emplace_back(excess_risk_bound(TuningPair::make(b, l), eta, classes));
      }
    }
  }
  return grid;
}

void write_bound_grid(const BoundGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "beta,lambda,value\n";
  for (std::size_t i = 0; i < grid.betas.size(); ++i)
    for (std::size_t k = 0; k < grid.lambdas.size(); ++k) {
      const auto& v = grid.at(i, k);
      out << format_real(grid.betas[i]) << ',' << format_real(grid.lambdas[k]) << ','
          << (v ? full(*v) : std::string("NA")) << '\n';
    }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

ProbVector example1_p_star(double x) {
  const double p1 = example1_posterior(x);
  return ProbVector({p1, 1.0 - p1});
}

std::vector<double> psi(const ArchitectureSpec& arch, const NetworkParams& params, std::span<const double> x,
                        const TuningPair& t, const ProbVector& p_star) {
  const auto trace = forward(params, arch, x);
  if (p_star.size() != trace.probs.size()) throw std::invalid_argument("psi: posterior has wrong dimension");
  const auto p = clamp_probs(trace.probs);
  const auto ps = clamp_probs(p_star.values());
  std::vector<double> weights(p.size());
  for (std::size_t j = 0; j < p.size(); ++j)
    weights[j] = std::pow(p[j], t.b() - 1.0) * (std::pow(p[j], t.a()) - std::pow(ps[j], t.a()));
  const auto grad_logits = softmax_pullback(trace.probs, weights);
  std::vector<double> out(params.size(), 0.0);
  backward_accumulate(trace, params, arch, grad_logits, 1.0, out, {});
  return out;
}

Eigen::MatrixXd logit_hessian(const ArchitectureSpec& arch, const NetworkParams& params, std::span<const double> x) {
  require_supported(arch);
  const auto n = static_cast<Eigen::Index>(params.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  if (arch.hidden.empty()) return h;  // affine logit

  const auto& hidden = params.shapes[0];
  const auto& out = params.shapes[1];
  const Activation act = arch.hidden[0].activation;
  for (std::size_t k = 0; k < hidden.rows; ++k) {
    double s = params.flat[hidden.bias_index(k)];
    for (std::size_t c = 0; c < hidden.cols; ++c) s += params.flat[hidden.weight_index(k, c)] * x[c];
    double d1 = 1.0, d2 = 0.0;
    if (act == Activation::tanh) {
      const double th = std::tanh(s);
      d1 = 1.0 - th * th;
      d2 = -2.0 * th * d1;
    } else if (act == Activation::relu) {
      d1 = s > 0.0 ? 1.0 : 0.0;
    }
    const double v = params.flat[out.weight_index(0, k)];
    const auto vi = static_cast<Eigen::Index>(out.weight_index(0, k));
    // ds/d(row entries): 1 for the bias, x_c for weight c
    std::vector<std::pair<Eigen::Index, double>> row{{static_cast<Eigen::Index>(hidden.bias_index(k)), 1.0}};
    for (std::size_t c = 0; c < hidden.cols; ++c)
      row.emplace_back(static_cast<Eigen::Index>(hidden.weight_index(k, c)), x[c]);
    for (const auto& [i, gi] : row) {
      h(vi, i) += d1 * gi;
      h(i, vi) += d1 * gi;
      for (const auto& [j, gj] : row) h(i, j) += v * d2 * gi * gj;
    }
  }
  return h;
}

std::vector<double> nudge_off_kinks(const ArchitectureSpec& arch, const NetworkParams& params,
                                    std::span<const double> sample) {
  std::vector<double> out(sample.begin(), sample.end());
  if (arch.hidden.empty() || arch.input_dim != 1) return out;
  if (arch.hidden[0].activation != Activation::relu) return out;
  const auto& hidden = params.shapes[0];
  for (double& x : out) {
    for (std::size_t k = 0; k < hidden.rows; ++k) {
      const double w = params.flat[hidden.weight_index(k, 0)];
      if (w == 0.0) continue;
      const double kink = -params.flat[hidden.bias_index(k)] / w;
      if (std::abs(x - kink) < 1e-6) x += 1e-6;
    }
  }
  return out;
}

Eigen::MatrixXd big_psi(const ArchitectureSpec& arch, const NetworkParams& params, const TuningPair& t,
                        std::span<const double> sample, const PosteriorFn& p_star) {
  require_supported(arch);
  if (sample.empty()) throw std::invalid_argument("big_psi: empty feature sample");
  const auto n = static_cast<Eigen::Index>(params.size());
  const double beta = t.beta(), a = t.a(), b = t.b();
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(n, n);
  const std::array<double, 2> first_logit{1.0, 0.0};

  for (double x : nudge_off_kinks(arch, params, sample)) {
    const std::array<double, 1> xs{x};
    const auto trace = forward(params, arch, xs);
    const auto grads = backward(trace, params, arch, first_logit);
    const Eigen::Map<const Eigen::VectorXd> grad_z(grads.params.data(), n);

    const double p1 = trace.probs[0];
    const double s1 = p1 * (1.0 - p1);
    const double s2 = s1 * (1.0 - 2.0 * p1);
    const Eigen::VectorXd grad_p1 = s1 * grad_z;
    const Eigen::MatrixXd hess_p1 = s2 * grad_z * grad_z.transpose() + s1 * logit_hessian(arch, params, xs);

    const auto pc = clamp_probs(trace.probs);
    const auto ps = clamp_probs(p_star(x).values());
    double u[2], du[2];
    for (int j = 0; j < 2; ++j) {
      const double psa = std::pow(ps[j], a);
      u[j] = std::pow(pc[j], b - 1.0) * (std::pow(pc[j], a) - psa);
      du[j] = beta * std::pow(pc[j], beta - 1.0) - psa * (b - 1.0) * std::pow(pc[j], b - 2.0);
    }
    // grad p2 = -grad p1 and hess p2 = -hess p1
    total += (du[0] + du[1]) * grad_p1 * grad_p1.transpose() + (u[0] - u[1]) * hess_p1;
  }
  return total / static_cast<double>(sample.size());
}

PseudoInverse pseudo_inverse(const Eigen::MatrixXd& m, double relative_cutoff) {
  if (!all_finite(m)) throw NumericError("pseudo_inverse: matrix has non-finite entries");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericError("pseudo_inverse: SVD did not converge");
  const auto& sv = svd.singularValues();
  const double cutoff = (sv.size() ? sv(0) : 0.0) * relative_cutoff;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) {
      inv(i) = 1.0 / sv(i);
      ++rank;
    }
  }
  PseudoInverse out{svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose(), rank};
  if (!all_finite(out.matrix)) throw NumericError("pseudo_inverse: result has non-finite entries");
  return out;
}

std::vector<double> normal_feature_sample(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (double& x : out) x = rng.normal();
  return out;
}

IFCurves influence_function(const IFRequest& req) {
  const auto arch = example_model(req.model);
  const auto params = make_params(arch, req.theta_g);
  const auto pinv = pseudo_inverse(big_psi(arch, params, req.tuning, req.feature_sample, req.p_star));

  IFCurves curves{req.x_grid, Eigen::MatrixXd(static_cast<Eigen::Index>(req.x_grid.size()),
                                              static_cast<Eigen::Index>(params.size())),
                  pinv.rank};
  for (std::size_t i = 0; i < req.x_grid.size(); ++i) {
    const double x = req.x_grid[i];
    const std::array<double, 1> xs{x};
    const auto score = psi(arch, params, xs, req.tuning, req.p_star(x));
    const Eigen::Map<const Eigen::VectorXd> s(score.data(), static_cast<Eigen::Index>(score.size()));
    curves.values.row(static_cast<Eigen::Index>(i)) = -(pinv.matrix * s).transpose();
  }
  if (!all_finite(curves.values)) throw NumericError("influence_function: non-finite influence values");
  return curves;
}

void write_if_curves(const IFCurves& curves, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "x_t,component,value\n";
  for (Eigen::Index i = 0; i < curves.values.rows(); ++i)
    for (Eigen::Index c = 0; c < curves.values.cols(); ++c)
      out << format_real(curves.x_grid[static_cast<std::size_t>(i)]) << ',' << c + 1 << ','
          << full(curves.values(i, c)) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

CalibrationResult calibration_check(const ProbVector& p_star, const TuningPair& t, std::size_t steps) {
  const std::size_t J = p_star.size();
  if (J < 2 || J > 4) throw std::invalid_argument("calibration_check: supports 2 <= J <= 4");
  if (steps < 1) throw std::invalid_argument("calibration_check: steps must be >= 1");

  double best = std::numeric_limits<double>::infinity(), second = best;
  std::vector<std::size_t> counts(J, 0), best_counts;
  counts[J - 1] = steps;
  std::vector<double> p(J);
  // Walk all compositions of `steps` into J non-negative parts.
  while (true) {
    for (std::size_t j = 0; j < J; ++j) p[j] = static_cast<double>(counts[j]) / static_cast<double>(steps);
    const double r = conditional_sd_risk(p_star.values(), p, t);
    if (r < best) {
      second = best;
      best = r;
      best_counts = counts;
    } else if (r < second) {
      second = r;
    }
    // next composition: move one unit from the last part into the earlier ones
    std::size_t j = J - 1;
    while (j > 0 && counts[j] == 0) --j;
    if (j == 0) break;
    const std::size_t rest = counts[j] - 1;
    counts[j] = 0;
    ++counts[j - 1];
    counts[J - 1] = rest;
  }

  CalibrationResult out;
  out.argmin.resize(J);
  for (std::size_t j = 0; j < J; ++j)
    out.argmin[j] = static_cast<double>(best_counts[j]) / static_cast<double>(steps);
  out.min_risk = best;
  out.runner_up_gap = second - best;
  out.argmin_class = static_cast<std::size_t>(std::max_element(out.argmin.begin(), out.argmin.end()) - out.argmin.begin());
  const auto ps = p_star.values();
  out.bayes_class = static_cast<std::size_t>(std::max_element(ps.begin(), ps.end()) - ps.begin());
  for (std::size_t j = 0; j < J; ++j) out.linf_to_p_star = std::max(out.linf_to_p_star, std::abs(out.argmin[j] - ps[j]));
  out.calibrated = out.argmin_class == out.bayes_class;
  return out;
}

}  // namespace rsdnet
