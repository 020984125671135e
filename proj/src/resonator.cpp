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

#include "rokit/resonator.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Core>
#include <fmt/core.h>

namespace rokit {

namespace {

using Branches = Eigen::Vector2cd;
constexpr cplx kI{0.0, 1.0};

}  // namespace

void ResonatorParams::validate() const {
  if (!(kappa_r > 0.0)) throw ValidationError("resonator: kappa_r must be positive");
  if (!(kappa_ext >= 0.0)) throw ValidationError("resonator: kappa_ext must be non-negative");
  if (!(kappa_int >= 0.0)) throw ValidationError("resonator: kappa_int must be non-negative");
  if (std::abs(kappa_ext + kappa_int - kappa_r) > 1e-9 * kappa_r) {
    throw ValidationError("resonator: kappa_r must equal kappa_ext + kappa_int");
  }
  if (!std::isfinite(kerr) || !std::isfinite(chi_qr)) throw ValidationError("resonator: non-finite kerr or chi_qr");
}

ResonatorParams ResonatorParams::from_hz(double kappa_r_hz, double kappa_ext_hz, double kappa_int_hz,
                                         double kerr_hz, double chi_qr_hz, cplx k_sca) {
  ResonatorParams p;
  p.kappa_r = hz_to_rad(kappa_r_hz);
  p.kappa_ext = hz_to_rad(kappa_ext_hz);
  p.kappa_int = hz_to_rad(kappa_int_hz);
  p.kerr = hz_to_rad(kerr_hz);
  p.chi_qr = hz_to_rad(chi_qr_hz);
  p.k_sca = k_sca;
  return p;
}

double ShapedPulse::duration() const {
  double total = 0.0;
  for (const auto& s : segments) total += s.length();
  return total;
}

void ShapedPulse::validate() const {
  if (segments.empty()) throw ValidationError("pulse: no segments");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (!(s.length_ns > 0.0) || !std::isfinite(s.length_ns)) {
      throw ValidationError("pulse: segment " + std::to_string(i) + " has non-positive length");
    }
    if (!all_finite(s.amplitude_hz)) throw ValidationError("pulse: segment " + std::to_string(i) + " amplitude");
  }
  if (!std::isfinite(detuning_hz)) throw ValidationError("pulse: non-finite detuning");
}

double default_time_step(const ResonatorParams& params, const ShapedPulse& pulse) {
  double dt = 1.0 / (50.0 * params.kappa_r);
  for (const auto& s : pulse.segments) dt = std::min(dt, s.length() / 20.0);
  return dt;
}

Trajectory simulate_trajectories(const ResonatorParams& params, const ShapedPulse& pulse, double tail,
                                 const SimulationOptions& options) {
  params.validate();
  pulse.validate();
  if (!(tail >= 0.0)) throw ValidationError("simulate_trajectories: tail must be non-negative");
  const double dt = options.dt > 0.0 ? options.dt : default_time_step(params, pulse);

  const double delta_g = pulse.detuning() - 0.5 * params.chi_qr;
  const double delta_e = pulse.detuning() + 0.5 * params.chi_qr;
  const double half_kappa = 0.5 * params.kappa_r;
  const double kerr = params.kerr;

  Trajectory traj;
  traj.times.push_back(0.0);
  traj.alpha_g.push_back(0.0);
  traj.alpha_e.push_back(0.0);

  Branches y = Branches::Zero();
  double t = 0.0;
  auto leg = [&](cplx drive, double t_end) {
    auto rhs = [&](double, const Branches& a) {
      Branches d;
      d(0) = -(kI * (delta_g + kerr * std::norm(a(0))) + half_kappa) * a(0) + drive;
      d(1) = -(kI * (delta_e + kerr * std::norm(a(1))) + half_kappa) * a(1) + drive;
      return d;
    };
    auto sampled = integrate_ode(rhs, y, t, t_end, dt);
    for (std::size_t i = 1; i < sampled.times.size(); ++i) {
      const Branches& s = sampled.states[i];
      if (std::max(std::norm(s(0)), std::norm(s(1))) > options.ionization_photons) {
        throw IonizationRegime(fmt::format("resonator photon number exceeded {:g} at t = {:g} ns; reduce the drive power",
                                           options.ionization_photons, sampled.times[i] * 1e9));
      }
      traj.times.push_back(sampled.times[i]);
      traj.alpha_g.push_back(s(0));
      traj.alpha_e.push_back(s(1));
    }
    y = sampled.states.back();
    t = t_end;
  };

  for (const auto& seg : pulse.segments) leg(seg.amplitude(), t + seg.length());

  if (tail > 0.0) {
    const double end_of_pulse = t;
    std::set<double> marks;
    for (double m : options.tail_marks) {
      if (m > end_of_pulse && m < end_of_pulse + tail) marks.insert(m);
    }
    for (double m : marks) leg(0.0, m);
    leg(0.0, end_of_pulse + tail);
  }
  return traj;
}

std::vector<SteadyState> steady_state(const ResonatorParams& params, double detuning, cplx amplitude) {
  const double drive2 = std::norm(amplitude);
  const double k = params.kerr;
  const double quarter_kappa2 = 0.25 * params.kappa_r * params.kappa_r;

  std::vector<double> photons;
  if (drive2 == 0.0) {
    photons.push_back(0.0);
  } else if (k == 0.0) {
    photons.push_back(drive2 / (detuning * detuning + quarter_kappa2));
  } else {
    // K^2 n^3 + 2 Delta K n^2 + (Delta^2 + kappa^2/4) n - |A|^2 = 0
    for (double n : cubic_real_roots(k * k, 2.0 * detuning * k, detuning * detuning + quarter_kappa2, -drive2)) {
      if (n >= 0.0) photons.push_back(n);
    }
  }

  std::vector<SteadyState> out;
  out.reserve(photons.size());
  for (double n : photons) {
    const cplx alpha = amplitude / (kI * (detuning + k * n) + 0.5 * params.kappa_r);
    out.push_back({n, alpha});
  }
  return out;
}

double predicted_photons(double kerr, double kappa_r, double k_sca_abs, const CalibrationPoint& point) {
  ResonatorParams p;
  p.kappa_r = kappa_r;
  p.kerr = kerr;
  const auto roots = steady_state(p, point.detuning, drive_rate(k_sca_abs, point.a_dac));
  double best = roots.front().photons;
  for (const auto& r : roots) {
    if (std::abs(r.photons - point.photons) < std::abs(best - point.photons)) best = r.photons;
  }
  return best;
}

PhotonCalibration calibrate_photon_number(std::span<const CalibrationPoint> data, double kerr_guess,
                                          double kappa_r_guess, double k_sca_guess) {
  std::set<double> detunings, amplitudes;
  for (const auto& d : data) {
    detunings.insert(d.detuning);
    amplitudes.insert(d.a_dac);
  }
  if (detunings.size() < 3 || amplitudes.size() < 2) {
    throw ValidationError("calibrate_photon_number: need >= 3 distinct detunings and >= 2 amplitudes");
  }

  std::vector<double> observed;
  observed.reserve(data.size());
  for (const auto& d : data) observed.push_back(d.photons);

  VectorModel model = [&](std::span<const double> p, std::span<double> out) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      out[i] = predicted_photons(p[0], std::abs(p[1]), std::abs(p[2]), data[i]);
    }
  };
  LsqOptions opt;
  opt.typical = {1e-3 * std::abs(kappa_r_guess), std::abs(kappa_r_guess), std::abs(k_sca_guess)};
  opt.relative_residual_tol = 1e-14;

  PhotonCalibration cal;
  cal.fit = least_squares(model, observed, {}, {kerr_guess, kappa_r_guess, k_sca_guess}, opt);
  cal.fit.parameters[1] = std::abs(cal.fit.parameters[1]);
  cal.fit.parameters[2] = std::abs(cal.fit.parameters[2]);
  cal.kerr_consistent_with_zero = std::abs(cal.kerr()) < cal.fit.stderr_of(0);
  return cal;
}

std::vector<double> measurement_rate(const Trajectory& traj) {
  std::vector<double> rate(traj.times.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < rate.size(); ++i) {
    rate[i] = std::norm(traj.alpha_g[i] - traj.alpha_e[i]);
    peak = std::max(peak, rate[i]);
  }
  if (!(peak > 0.0)) throw DegenerateReadout("measurement_rate: the two qubit branches never separate");
  for (double& r : rate) r /= peak;
  return rate;
}

double snr_slope(const ResonatorParams& params, double photons, double eta) {
  if (!(photons > 0.0)) throw ValidationError("snr_slope: photon number must be positive");
  const double chi2 = params.chi_qr * params.chi_qr;
  return eta * photons * params.kappa_ext * 8.0 * chi2 / (chi2 + params.kappa_r * params.kappa_r);
}

FitResult fit_efficiency(std::span<const SnrPoint> data, const ResonatorParams& params, double photons) {
  if (data.size() < 3) throw ValidationError("fit_efficiency: need at least 3 integration times");
  const double per_eta = snr_slope(params, photons, 1.0);
  if (!(per_eta > 0.0)) throw ValidationError("fit_efficiency: zero SNR rate per unit efficiency");

  double stt = 0.0, sts = 0.0;
  for (const auto& d : data) {
    stt += d.tau_int * d.tau_int;
    sts += d.tau_int * d.snr;
  }
  const double slope = sts / stt;
  if (slope < 0.0) throw ValidationError("fit_efficiency: negative SNR slope (invalid data)");
  double rss = 0.0;
  for (const auto& d : data) rss += (d.snr - slope * d.tau_int) * (d.snr - slope * d.tau_int);
  const double slope_var = rss / static_cast<double>(data.size() - 1) / stt;

  FitResult fit;
  fit.parameters = {slope / per_eta};
  fit.covariance = Eigen::MatrixXd::Constant(1, 1, slope_var / (per_eta * per_eta));
  fit.residual_norm = std::sqrt(rss);
  fit.converged = true;
  fit.iterations = 1;
  return fit;
}

}  // namespace rokit
