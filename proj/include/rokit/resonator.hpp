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

#ifndef ROKIT_RESONATOR_HPP
#define ROKIT_RESONATOR_HPP

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "rokit/numerics.hpp"

namespace rokit {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

inline double hz_to_rad(double hz) { return kTwoPi * hz; }
inline double rad_to_hz(double rad_s) { return rad_s / kTwoPi; }

// Duffing model of the readout resonator. All rates in rad/s.
struct ResonatorParams {
  double kappa_r = 0.0;
  double kappa_ext = 0.0;
  double kappa_int = 0.0;
  double kerr = 0.0;      // self-Kerr K
  double chi_qr = 0.0;    // resonator pull between qubit |g> and |e>
  cplx k_sca{1.0, 0.0};   // A/2pi [MHz] = k_sca * a_DAC

  // Throws ValidationError when kappa_r != kappa_ext + kappa_int or a rate is negative.
  void validate() const;

  static ResonatorParams from_hz(double kappa_r_hz, double kappa_ext_hz, double kappa_int_hz,
                                 double kerr_hz, double chi_qr_hz, cplx k_sca = {1.0, 0.0});
};

// Piecewise-constant drive. Stored in the units of the pulse file so that
// reading and writing is exact: amplitudes as A/2pi in Hz, lengths in ns.
struct PulseSegment {
  cplx amplitude_hz;
  double length_ns = 0.0;

  cplx amplitude() const { return kTwoPi * amplitude_hz; }  // rad/s
  double length() const { return length_ns * 1e-9; }       // seconds

  bool operator==(const PulseSegment&) const = default;
};

struct ShapedPulse {
  double detuning_hz = 0.0;  // from omega_r + chi_qr/2
  std::vector<PulseSegment> segments;

  double detuning() const { return hz_to_rad(detuning_hz); }
  double duration() const;  // seconds
  void validate() const;

  bool operator==(const ShapedPulse&) const = default;
};

struct Trajectory {
  std::vector<double> times;  // seconds
  std::vector<cplx> alpha_g;
  std::vector<cplx> alpha_e;
};

struct SimulationOptions {
  double dt = 0.0;                   // 0 selects min(1/(50 kappa_r), shortest segment / 20)
  std::vector<double> tail_marks;    // extra sample times (after the pulse) to hit exactly
  double ionization_photons = 1e6;
};

double default_time_step(const ResonatorParams& params, const ShapedPulse& pulse);

// Integrates both qubit branches from the vacuum through the pulse and a
// drive-free tail. Branch g sees detuning Delta0 - chi/2, branch e Delta0 + chi/2.
Trajectory simulate_trajectories(const ResonatorParams& params, const ShapedPulse& pulse, double tail,
                                 const SimulationOptions& options = {});

struct SteadyState {
  double photons = 0.0;
  cplx alpha;
};

// Classical steady states of the driven Kerr oscillator, ascending in photon number.
std::vector<SteadyState> steady_state(const ResonatorParams& params, double detuning, cplx amplitude);

struct CalibrationPoint {
  double detuning = 0.0;  // rad/s
  double a_dac = 0.0;
  double photons = 0.0;   // observed n_r
};

struct PhotonCalibration {
  FitResult fit;  // parameters: K [rad/s], kappa_r [rad/s], |k_sca| [MHz per DAC unit]
  bool kerr_consistent_with_zero = false;

  double kerr() const { return fit.parameters[0]; }
  double kappa_r() const { return fit.parameters[1]; }
  double k_sca() const { return fit.parameters[2]; }
};

// Drive rate A [rad/s] for a DAC amplitude.
inline double drive_rate(double k_sca_abs, double a_dac) { return kTwoPi * 1e6 * k_sca_abs * a_dac; }

// Photon number the model predicts for one calibration point, taking the
// steady-state branch nearest `observed` when the response is multistable.
double predicted_photons(double kerr, double kappa_r, double k_sca_abs, const CalibrationPoint& point);

PhotonCalibration calibrate_photon_number(std::span<const CalibrationPoint> data, double kerr_guess,
                                          double kappa_r_guess, double k_sca_guess);

// |alpha_g - alpha_e|^2 normalized to its maximum.
std::vector<double> measurement_rate(const Trajectory& traj);

// d SNR / d tau_int in the steady state, 1/s.
double snr_slope(const ResonatorParams& params, double photons, double eta);

struct SnrPoint {
  double tau_int = 0.0;  // seconds
  double snr = 0.0;
};

// Efficiency from a zero-intercept linear fit of SNR against integration time.
FitResult fit_efficiency(std::span<const SnrPoint> data, const ResonatorParams& params, double photons);

}  // namespace rokit

#endif  // ROKIT_RESONATOR_HPP
