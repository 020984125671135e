// Copyright 2026 The rokit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "rokit/numerics.hpp"

namespace rokit {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Problem {
  const VectorModel& model;
  VectorXd y;
  VectorXd sqrt_w;
  std::vector<double> scratch;

  VectorXd residual(const VectorXd& p) {
    scratch.assign(static_cast<std::size_t>(y.size()), 0.0);
    model(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())), scratch);
    VectorXd r(y.size());
    for (Index i = 0; i < y.size(); ++i) {
      r(i) = sqrt_w(i) * (y(i) - scratch[static_cast<std::size_t>(i)]);
    }
    return r;
  }
};

// Jacobian of the weighted predictions, i.e. -d(residual)/dp.
MatrixXd jacobian(Problem& prob, const VectorXd& p, const VectorXd& r0, const LsqOptions& opt) {
  MatrixXd jac(r0.size(), p.size());
  for (Index j = 0; j < p.size(); ++j) {
    double floor = 1.0;
    if (static_cast<std::size_t>(j) < opt.typical.size() && opt.typical[static_cast<std::size_t>(j)] > 0.0) {
      floor = opt.typical[static_cast<std::size_t>(j)];
    }
    const double h = opt.jacobian_step * std::max(std::abs(p(j)), floor);
    VectorXd q = p;
    q(j) += h;
    const double actual_h = q(j) - p(j);
    jac.col(j) = (r0 - prob.residual(q)) / actual_h;
  }
  return jac;
}

}  // namespace

FitResult least_squares(const VectorModel& model, std::span<const double> observations,
                        std::span<const double> weights, std::vector<double> initial_guess,
                        const LsqOptions& options) {
  const auto n = static_cast<Index>(observations.size());
  const auto np = static_cast<Index>(initial_guess.size());
  if (np == 0) throw ValidationError("least_squares: no parameters");
  if (n < np) throw ValidationError("least_squares: fewer observations than parameters");
  if (!weights.empty() && static_cast<Index>(weights.size()) != n) {
    throw ValidationError("least_squares: weights and observations differ in length");
  }

  Problem prob{model, VectorXd(n), VectorXd(n), {}};
  for (Index i = 0; i < n; ++i) {
    const double w = weights.empty() ? 1.0 : weights[static_cast<std::size_t>(i)];
    if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("least_squares: weights must be positive");
    if (!std::isfinite(observations[static_cast<std::size_t>(i)])) {
      throw ValidationError("least_squares: non-finite observation");
    }
    prob.y(i) = observations[static_cast<std::size_t>(i)];
    prob.sqrt_w(i) = std::sqrt(w);
  }

  VectorXd p = Eigen::Map<const VectorXd>(initial_guess.data(), np);
  VectorXd r = prob.residual(p);
  if (!r.allFinite()) throw NumericalError("least_squares: model is not finite at the initial guess");
  double cost = r.squaredNorm();

  FitResult result;
  MatrixXd jac = jacobian(prob, p, r, options);
  {
    Eigen::ColPivHouseholderQR<MatrixXd> qr(jac);
    qr.setThreshold(1e-12);
    if (qr.rank() < np) throw DegenerateFit("least_squares: singular Jacobian (parameters not identifiable)");
  }

  double mu = 1e-3;
  int iter = 0;
  bool converged = cost == 0.0;
  while (!converged && iter < options.max_iterations) {
    ++iter;
    const MatrixXd jtj = jac.transpose() * jac;
    const VectorXd jtr = jac.transpose() * r;
    VectorXd diag = jtj.diagonal();
    for (Index j = 0; j < np; ++j) {
      if (!(diag(j) > 0.0)) throw DegenerateFit("least_squares: parameter has no effect on the model");
    }

    bool accepted = false;
    while (!accepted) {
      MatrixXd a = jtj;
      a.diagonal() += mu * diag;
      const VectorXd step = a.ldlt().solve(jtr);
      const VectorXd trial = p + step;
      VectorXd r_trial = prob.residual(trial);
      const double cost_trial = r_trial.allFinite() ? r_trial.squaredNorm() : INFINITY;

      const bool tiny_step =
          step.norm() <= options.step_tol * (p.norm() + options.step_tol);
      if (cost_trial <= cost) {
        const double actual = (cost - cost_trial) / std::max(cost, 1e-300);
        const double predicted = (cost - (r - jac * step).squaredNorm()) / std::max(cost, 1e-300);
        p = trial;
        r = std::move(r_trial);
        cost = cost_trial;
        mu = std::max(mu / 3.0, 1e-12);
        accepted = true;
        if (cost == 0.0 || tiny_step ||
            (std::abs(actual) < options.relative_residual_tol &&
             std::abs(predicted) < options.relative_residual_tol)) {
          converged = true;
        }
      } else {
        mu *= 4.0;
        if (tiny_step || mu > 1e20) {
          // No downhill direction left at machine resolution.
          converged = true;
          break;
        }
      }
    }
    if (!converged) jac = jacobian(prob, p, r, options);
  }

  if (converged) jac = jacobian(prob, p, r, options);
  const MatrixXd jtj = jac.transpose() * jac;
  MatrixXd cov = jtj.completeOrthogonalDecomposition().pseudoInverse();
  if (options.scale_covariance && n > np) cov *= cost / static_cast<double>(n - np);
  cov = 0.5 * (cov + cov.transpose());

  result.parameters.assign(p.data(), p.data() + np);
  result.covariance = std::move(cov);
  result.residual_norm = std::sqrt(cost);
  result.converged = converged;
  result.iterations = iter;
  return result;
}

}  // namespace rokit
