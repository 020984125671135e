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


#include "rokit/pulse.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <cmath>
#include <numbers>
#include <string>
#include <thread>

namespace rokit {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double trapezoid(const std::vector<double>& t, const std::vector<double>& y, std::size_t lo, std::size_t hi) {
  double sum = 0.0;
  for (std::size_t i = lo; i < hi; ++i) sum += 0.5 * (t[i + 1] - t[i]) * (y[i] + y[i + 1]);
  return sum;
}

// Linear steady-state drive that holds n_max photons on resonance.
double linear_amplitude(const ResonatorParams& params, double n_max) {
  return std::sqrt(n_max) * 0.5 * params.kappa_r;
}

// Search coordinates for an n-segment pulse:
//   [0, n)          magnitudes in units of the linear amplitude
//   [n, 2n-1)       phases of segments 2..n (segment 1 fixes the global phase)
//   [2n-1, 3n-2)    log-weights of segments 1..n-1 (segment n has weight 0)
//   3n-2            detuning in units of kappa_r
struct Layout {
  int n;
  double a_lin;
  double kappa;
  double tau;
  double min_len;

  std::size_t dim() const { return static_cast<std::size_t>(3 * n - 1); }

  // Returns the pulse and the squared excess over the magnitude bound.
  ShapedPulse decode(std::span<const double> x, double& bound_excess) const {
    const std::size_t un = static_cast<std::size_t>(n);
    bound_excess = 0.0;
    std::vector<double> mags(un);
    for (std::size_t i = 0; i < un; ++i) {
      double m = std::abs(x[i]);
      if (m > 10.0) {
        bound_excess += (m - 10.0) * (m - 10.0);
        m = 10.0;
      }
      mags[i] = m;
    }
    mags[0] = std::max(mags[0], 1e-6);
    for (std::size_t i = 1; i < un; ++i) mags[i] = std::max(mags[i], 1e-6 * mags[0]);

    std::vector<double> w(un, 1.0);
    double wmax = 0.0;
    for (std::size_t i = 0; i + 1 < un; ++i) wmax = std::max(wmax, x[2 * un - 1 + i]);
    double wsum = 0.0;
    for (std::size_t i = 0; i < un; ++i) {
      const double u = (i + 1 < un) ? x[2 * un - 1 + i] : 0.0;
      w[i] = std::exp(u - wmax);
      wsum += w[i];
    }
    const double free_len = tau - static_cast<double>(n) * min_len;

    ShapedPulse p;
    p.detuning_hz = rad_to_hz(x[3 * un - 2] * kappa);
    for (std::size_t i = 0; i < un; ++i) {
      const double phase = i == 0 ? 0.0 : x[un + i - 1];
      const cplx a = std::polar(mags[i] * a_lin, phase);
      p.segments.push_back({a / kTwoPi, 1e9 * (min_len + free_len * w[i] / wsum)});
    }
    return p;
  }
};

std::vector<double> heuristic_start(int n) {
  const std::size_t un = static_cast<std::size_t>(n);
  std::vector<double> x(3 * un - 1, 0.0);
  if (n == 4) {
    const double mags[] = {2.5, 1.0, 2.5, 1.0};
    const double phases[] = {0.0, kPi, kPi};
    const double fractions[] = {0.12, 0.6, 0.14, 0.14};
    for (std::size_t i = 0; i < 4; ++i) x[i] = mags[i];
    for (std::size_t i = 0; i < 3; ++i) x[4 + i] = phases[i];
    for (std::size_t i = 0; i < 3; ++i) x[7 + i] = std::log(fractions[i] / fractions[3]);
  } else if (n == 2) {
    x = {2.5, 1.0, 0.0, std::log(0.25 / 0.75), 0.0};
  } else {
    for (std::size_t i = 0; i < un; ++i) x[i] = 1.0;
  }
  return x;
}

std::vector<double> random_start(int n, RandomStream& rng) {
  const std::size_t un = static_cast<std::size_t>(n);
  std::vector<double> x(3 * un - 1, 0.0);
  for (std::size_t i = 0; i < un; ++i) x[i] = 0.3 + 2.7 * rng.uniform();
  for (std::size_t i = 0; i + 1 < un; ++i) x[un + i] = kPi * (2.0 * rng.uniform() - 1.0);
  for (std::size_t i = 0; i + 1 < un; ++i) x[2 * un - 1 + i] = 0.7 * rng.normal();
  x[3 * un - 2] = rng.uniform() - 0.5;
  return x;
}

// Shrinks all amplitudes by a common factor until the pulse respects the cap.
ShapedPulse scale_to_cap(const ResonatorParams& params, ShapedPulse pulse, const PulseConstraint& c) {
  auto scaled = [&](double s) {
    ShapedPulse q = pulse;
    for (auto& seg : q.segments) seg.amplitude_hz *= s;
    return q;
  };
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (evaluate_objective(params, scaled(mid), c).exceeds_cap) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return scaled(lo);
}

}  // namespace

void PulseConstraint::validate() const {
  if (!(n_max > 0.0)) throw ValidationError("pulse constraint: n_max must be positive");
  if (!(tau_ro > 0.0)) throw ValidationError("pulse constraint: tau_ro must be positive");
  if (segment_count != 1 && segment_count != 2 && segment_count != 4) {
    throw ValidationError("pulse constraint: segment_count must be 1, 2 or 4");
  }
}

PulseObjective evaluate_objective(const ResonatorParams& params, const ShapedPulse& pulse,
                                  const PulseConstraint& constraint) {
  constraint.validate();
  const double duration = pulse.duration();
  if (std::abs(duration - constraint.tau_ro) > 1e-9 * constraint.tau_ro) {
    throw ValidationError("evaluate_objective: pulse length differs from tau_ro");
  }
  const double residual_time = duration + 2.0 / params.kappa_r;
  SimulationOptions opts;
  opts.tail_marks = {residual_time};
  const Trajectory traj = simulate_trajectories(params, pulse, ring_down_window(params), opts);

  const std::size_t count = traj.times.size();
  std::vector<double> sep(count);
  PulseObjective out;
  for (std::size_t i = 0; i < count; ++i) {
    sep[i] = std::norm(traj.alpha_g[i] - traj.alpha_e[i]);
    out.peak_n = std::max({out.peak_n, std::norm(traj.alpha_g[i]), std::norm(traj.alpha_e[i])});
  }
  const auto end_it = std::lower_bound(traj.times.begin(), traj.times.end(), duration * (1.0 - 1e-12));
  const auto end = static_cast<std::size_t>(end_it - traj.times.begin());
  const auto res_it = std::lower_bound(traj.times.begin(), traj.times.end(), residual_time * (1.0 - 1e-12));
  const auto res = static_cast<std::size_t>(res_it - traj.times.begin());

  const double inside = trapezoid(traj.times, sep, 0, end);
  if (!(inside > 0.0)) throw DegenerateReadout("evaluate_objective: no separation during the pulse");
  out.theta = trapezoid(traj.times, sep, end, count - 1) / inside;
  out.residual_n = std::max(std::norm(traj.alpha_g[res]), std::norm(traj.alpha_e[res]));
  out.exceeds_cap = out.peak_n > constraint.n_max;
  return out;
}

ShapedPulse boxcar(cplx amplitude, double tau_ro, double detuning) {
  if (!(tau_ro > 0.0)) throw ValidationError("boxcar: tau_ro must be positive");
  ShapedPulse p;
  p.detuning_hz = rad_to_hz(detuning);
  p.segments.push_back({amplitude / kTwoPi, tau_ro * 1e9});
  return p;
}

BoxcarSearch best_boxcar(const ResonatorParams& params, const PulseConstraint& constraint) {
  params.validate();
  PulseConstraint c = constraint;
  c.segment_count = 1;
  c.validate();
  const double a_lin = linear_amplitude(params, c.n_max);

  // Largest real amplitude whose response stays at the cap.
  auto at_cap = [&](double detuning) {
    double lo = 0.0, hi = a_lin;
    while (!evaluate_objective(params, boxcar(hi, c.tau_ro, detuning), c).exceeds_cap) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e3 * a_lin) break;
    }
    for (int i = 0; i < 50; ++i) {
      const double mid = 0.5 * (lo + hi);
      (evaluate_objective(params, boxcar(mid, c.tau_ro, detuning), c).exceeds_cap ? hi : lo) = mid;
    }
    return boxcar(lo, c.tau_ro, detuning);
  };
  auto theta_at = [&](double detuning_units) {
    try {
      return evaluate_objective(params, at_cap(detuning_units * params.kappa_r), c).theta;
    } catch (const NumericalError&) {
      return kInf;
    }
  };

  double best_x = 0.0, best_v = kInf;
  const double step = 0.1;
  for (int i = -15; i <= 15; ++i) {
    const double x = step * i;
    const double v = theta_at(x);
    if (v < best_v) {
      best_v = v;
      best_x = x;
    }
  }
  const double x = golden_section_minimize(theta_at, best_x - step, best_x + step, 1e-6);
  const double refined = theta_at(x) < best_v ? x : best_x;

  BoxcarSearch out;
  out.pulse = at_cap(refined * params.kappa_r);
  out.objective = evaluate_objective(params, out.pulse, c);
  return out;
}

OptimizedPulse optimize_pulse(const ResonatorParams& params, const PulseConstraint& constraint,
                              const RandomStream& seed, const PulseSearchOptions& options) {
  params.validate();
  constraint.validate();
  if (constraint.segment_count != 2 && constraint.segment_count != 4) {
    throw ValidationError("optimize_pulse: segment_count must be 2 or 4");
  }
  if (options.restarts < 1) throw ValidationError("optimize_pulse: restarts must be >= 1");
  const int n = constraint.segment_count;
  if (!(options.min_segment >= 0.0) || n * options.min_segment >= constraint.tau_ro) {
    throw ValidationError("optimize_pulse: tau_ro too short for the minimum segment length");
  }

  const Layout layout{n, linear_amplitude(params, constraint.n_max), params.kappa_r, constraint.tau_ro,
                      options.min_segment};
  const std::vector<double> start0 = heuristic_start(n);

  double bound0 = 0.0;
  const double theta0 = evaluate_objective(params, layout.decode(start0, bound0), constraint).theta;
  const double weight = 1e3 * theta0;

  auto penalized = [&](std::span<const double> x) {
    double bound = 0.0;
    const ShapedPulse p = layout.decode(x, bound);
    PulseObjective o;
    try {
      o = evaluate_objective(params, p, constraint);
    } catch (const NumericalError&) {
      return kInf;
    }
    const double over = std::max(0.0, o.peak_n / constraint.n_max - 1.0);
    const double left = options.residual_cap > 0.0 ? std::max(0.0, o.residual_n / options.residual_cap - 1.0) : 0.0;
    return o.theta + weight * (over * over + left * left + bound);
  };

  NelderMeadOptions nm;
  nm.f_tol = 1e-9;
  nm.x_tol = 1e-7;
  nm.initial_step.assign(layout.dim(), 0.0);
  for (std::size_t i = 0; i < layout.dim(); ++i) {
    const std::size_t un = static_cast<std::size_t>(n);
    nm.initial_step[i] = i < un ? 0.3 : (i < 2 * un - 1 ? 0.4 : (i < 3 * un - 2 ? 0.4 : 0.1));
  }

  const auto restarts = static_cast<std::size_t>(options.restarts);
  std::vector<NelderMeadResult> results(restarts);
  auto run_restart = [&](std::size_t r) {
    std::vector<double> x0 = start0;
    if (r > 0) {
      RandomStream rng(seed.seed(), stream_domain::kRestarts + seed.stream_id() * 4096 + r);
      x0 = random_start(n, rng);
    }
    // Two passes: the second re-expands the simplex around the first optimum.
    NelderMeadOptions first = nm;
    first.max_evaluations = options.max_evaluations * 3 / 5;
    NelderMeadResult a = nelder_mead(penalized, x0, first);
    NelderMeadOptions second = nm;
    second.max_evaluations = options.max_evaluations - a.evaluations;
    if (second.max_evaluations > static_cast<int>(layout.dim()) + 1) {
      NelderMeadResult b = nelder_mead(penalized, a.x, second);
      b.evaluations += a.evaluations;
      a.best_trace.insert(a.best_trace.end(), b.best_trace.begin(), b.best_trace.end());
      b.best_trace = std::move(a.best_trace);
      if (b.value <= a.value) {
        a = std::move(b);
      } else {
        a.best_trace = std::move(b.best_trace);
      }
    }
    results[r] = std::move(a);
  };

  const unsigned workers = static_cast<unsigned>(std::clamp(options.threads, 1, options.restarts));
  if (workers == 1) {
    for (std::size_t r = 0; r < restarts; ++r) run_restart(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < restarts; r = next++) run_restart(r);
      });
    }
    for (auto& t : pool) t.join();
  }

  OptimizedPulse out;
  out.penalty_weight = weight;
  out.restart_values.reserve(restarts);
  double best_value = kInf;
  bool found = false;
  for (std::size_t r = 0; r < restarts; ++r) {
    out.restart_values.push_back(results[r].value);
    if (!std::isfinite(results[r].value)) continue;
    double bound = 0.0;
    ShapedPulse p = layout.decode(results[r].x, bound);
    PulseObjective o = evaluate_objective(params, p, constraint);
    if (o.exceeds_cap) {
      p = scale_to_cap(params, p, constraint);
      o = evaluate_objective(params, p, constraint);
    }
    const double left =
        options.residual_cap > 0.0 ? std::max(0.0, o.residual_n / options.residual_cap - 1.0) : 0.0;
    const double value = o.theta + weight * (left * left + bound);
    if (!o.exceeds_cap && value < best_value) {
      best_value = value;
      out.pulse = std::move(p);
      out.objective = o;
      out.best_restart = static_cast<int>(r);
      found = true;
    }
  }
  if (!found) {
    const double best_penalty = *std::min_element(out.restart_values.begin(), out.restart_values.end());
    throw Infeasible("optimize_pulse: no restart produced a pulse below the photon cap", best_penalty);
  }
  out.trace = results[static_cast<std::size_t>(out.best_restart)].best_trace;
  return out;
}

}  // namespace rokit
