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

#ifndef ROKIT_PULSE_HPP
#define ROKIT_PULSE_HPP

#include <vector>

#include "rokit/random.hpp"
#include "rokit/resonator.hpp"

namespace rokit {

struct PulseConstraint {
  double n_max = 0.0;       // photon cap on either branch
  double tau_ro = 0.0;      // total pulse duration, seconds
  int segment_count = 4;

  void validate() const;
};

struct PulseObjective {
  double theta = 0.0;       // post-pulse / in-pulse separation integral
  double peak_n = 0.0;      // max |alpha|^2 over both branches, pulse and tail
  double residual_n = 0.0;  // max(|alpha_g|^2, |alpha_e|^2) at tau_ro + 2/kappa_r
  bool exceeds_cap = false;
};

// Ring-down window used for the numerator of theta.
inline double ring_down_window(const ResonatorParams& params) { return 10.0 / params.kappa_r; }

// Throws ValidationError when the pulse length differs from tau_ro and
// DegenerateReadout when the in-pulse separation integral vanishes.
PulseObjective evaluate_objective(const ResonatorParams& params, const ShapedPulse& pulse,
                                  const PulseConstraint& constraint);

// amplitude in rad/s, tau_ro and detuning in SI units.
ShapedPulse boxcar(cplx amplitude, double tau_ro, double detuning);

struct PulseSearchOptions {
  int restarts = 20;
  int threads = 1;
  int max_evaluations = 2500;  // per restart
  double min_segment = 2e-9;   // seconds
  double residual_cap = 0.01;  // target for residual_n, enforced by penalty
};

struct OptimizedPulse {
  ShapedPulse pulse;
  PulseObjective objective;
  int best_restart = 0;
  std::vector<double> restart_values;  // penalized objective at the end of each restart
  std::vector<double> trace;           // best penalized value per iteration, winning restart
  double penalty_weight = 0.0;
};

// Multi-start Nelder-Mead over segment amplitudes (magnitude, phase), relative
// lengths and the detuning. Restart r draws its start from stream
// (seed.seed(), kRestarts + seed.stream_id() * 4096 + r); restart 0 starts from
// a fixed ring-up / ring-down shape. Throws Infeasible when no restart ends
// below the photon cap.
OptimizedPulse optimize_pulse(const ResonatorParams& params, const PulseConstraint& constraint,
                              const RandomStream& seed, const PulseSearchOptions& options = {});

struct BoxcarSearch {
  ShapedPulse pulse;
  PulseObjective objective;
};

// Lowest-theta boxcar whose peak photon number sits at the cap.
BoxcarSearch best_boxcar(const ResonatorParams& params, const PulseConstraint& constraint);

}  // namespace rokit

#endif  // ROKIT_PULSE_HPP
