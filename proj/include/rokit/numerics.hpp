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

#ifndef ROKIT_NUMERICS_HPP
#define ROKIT_NUMERICS_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rokit/errors.hpp"

namespace rokit {

using cplx = std::complex<double>;

//
// Fixed-step RK4
//

template <class State>
struct Sampled {
  std::vector<double> times;
  std::vector<State> states;
};

inline bool all_finite(const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }
inline bool all_finite(double x) { return std::isfinite(x); }
template <class Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

// Classical 4th-order Runge-Kutta on [t0, t1] with step dt. Samples are taken
// at t0, t0 + dt, ... and exactly at t1; the last step is shortened if dt does
// not divide the span. Throws IntegrationDiverged on a non-finite state.
template <class State, class Derivative>
Sampled<State> integrate_ode(Derivative&& f, State initial, double t0, double t1, double dt) {
  if (!(dt > 0.0)) throw ValidationError("integrate_ode: dt must be positive");
  if (!(t1 > t0)) throw ValidationError("integrate_ode: t1 must exceed t0");

  Sampled<State> out;
  const double span = t1 - t0;
  // Guard against a sliver step caused by rounding in span / dt.
  std::size_t full_steps = static_cast<std::size_t>(std::floor(span / dt));
  if (full_steps > 0 && span - static_cast<double>(full_steps) * dt < 1e-9 * dt) --full_steps;
  const std::size_t n_steps = full_steps + 1;
  out.times.reserve(n_steps + 1);
  out.states.reserve(n_steps + 1);

  State y = std::move(initial);
  out.times.push_back(t0);
  out.states.push_back(y);
  for (std::size_t i = 0; i < n_steps; ++i) {
    const double t = t0 + static_cast<double>(i) * dt;
    const double t_next = (i + 1 == n_steps) ? t1 : t0 + static_cast<double>(i + 1) * dt;
    const double h = t_next - t;
    const State k1 = f(t, y);
    const State k2 = f(t + 0.5 * h, State(y + (0.5 * h) * k1));
    const State k3 = f(t + 0.5 * h, State(y + (0.5 * h) * k2));
    const State k4 = f(t + h, State(y + h * k3));
    y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!all_finite(y)) {
      throw IntegrationDiverged(
          "integration diverged: non-finite state at t = " + std::to_string(t_next), t_next);
    }
    out.times.push_back(t_next);
    out.states.push_back(y);
  }
  return out;
}

//
// Levenberg-Marquardt least squares
//

struct FitResult {
  std::vector<double> parameters;
  Eigen::MatrixXd covariance;
  double residual_norm = 0.0;  // sqrt of the weighted sum of squared residuals
  bool converged = false;
  int iterations = 0;

  double stderr_of(std::size_t i) const {
    return std::sqrt(std::max(0.0, covariance(static_cast<Eigen::Index>(i),
                                              static_cast<Eigen::Index>(i))));
  }
};

struct LsqOptions {
  int max_iterations = 500;
  double relative_residual_tol = 1e-10;
  double step_tol = 1e-12;          // relative to the parameter norm
  double jacobian_step = 1e-7;      // relative forward-difference step
  std::vector<double> typical;      // per-parameter magnitude floor for steps
  bool scale_covariance = true;     // multiply (J^T W J)^-1 by chi2 / dof
};

// Fills `predictions` (same length as the observations) for `parameters`.
using VectorModel = std::function<void(std::span<const double> parameters, std::span<double> predictions)>;

FitResult least_squares(const VectorModel& model, std::span<const double> observations,
                        std::span<const double> weights, std::vector<double> initial_guess,
                        const LsqOptions& options = {});

// Pointwise convenience form: model(parameters, input) for each input.
template <class Input>
FitResult least_squares(const std::function<double(std::span<const double>, const Input&)>& model,
                        std::span<const Input> inputs, std::span<const double> observations,
                        std::span<const double> weights, std::vector<double> initial_guess,
                        const LsqOptions& options = {}) {
  if (inputs.size() != observations.size()) {
    throw ValidationError("least_squares: inputs and observations differ in length");
  }
  VectorModel vector_model = [&](std::span<const double> p, std::span<double> out) {
    for (std::size_t i = 0; i < inputs.size(); ++i) out[i] = model(p, inputs[i]);
  };
  return least_squares(vector_model, observations, weights, std::move(initial_guess), options);
}

//
// Polynomials
//

// Real roots of c3 x^3 + c2 x^2 + c1 x + c0, ascending. A double root is
// reported once.
std::vector<double> cubic_real_roots(double c3, double c2, double c1, double c0);

//
// Nelder-Mead simplex search
//

struct NelderMeadOptions {
  int max_evaluations = 4000;
  double f_tol = 1e-12;    // spread of simplex values
  double x_tol = 1e-10;    // simplex diameter
  std::vector<double> initial_step;  // per-coordinate; defaults to 10% or 0.05
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
  std::vector<double> best_trace;  // best value after each iteration
};

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& objective,
                             std::vector<double> start, const NelderMeadOptions& options = {});

// Minimum of a unimodal function on [a, b] by golden-section search.
double golden_section_minimize(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-10, int max_iterations = 200);

// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace rokit

#endif  // ROKIT_NUMERICS_HPP
