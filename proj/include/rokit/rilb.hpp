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


#ifndef ROKIT_RILB_HPP
#define ROKIT_RILB_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "rokit/channel.hpp"
#include "rokit/numerics.hpp"

namespace rokit {

struct RILBConfig {
  int m_cycles = 40;
  int k_randomizations = 98;
  int n_shots = 1000;
  double pi_error = 0.0;  // probability that a flip does nothing
  double p_ini = 0.0;     // leaked population after pre-selection
  std::uint64_t seed = 0;

  void validate() const;
};

struct LeakageModel {
  double l_up = 0.0;
  double l_down = 0.0;
  double p0_given_l = 0.0;  // P(0|l); the experiment has P(1|l) ~ 1

  void validate() const;
};

// Per-cycle rates for the computational levels plus leakage. Assignment errors
// are P(1|g) and P(0|e).
struct CycleModel {
  LeakageModel leakage;
  double heat = 0.0;   // g -> e per cycle
  double decay = 0.0;  // e -> g per cycle
  double assign_error_g = 0.0;
  double assign_error_e = 0.0;

  void validate() const;
};

// Either the rate model above or a full joint readout table. With a table,
// each readout draws (post-state, outcome) jointly; leaked shots stay leaked.
using ReadoutModel = std::variant<CycleModel, ReadoutChannel>;

// K x M input bits; true means X (flip).
using Sequences = std::vector<std::vector<bool>>;

// Bit i of randomization k is drawn from stream (seed, kSequences + k).
// `overrides` replaces randomizations 0, 1, ... verbatim.
Sequences generate_sequences(const RILBConfig& config, const Sequences& overrides = {});

// Special input strings I^M, I^(M-1)X and X^M.
Sequences special_sequences(int m_cycles);

struct RILBRun {
  RILBConfig config;
  Sequences sequences;
  // Outcome r_m of shot n in randomization k at bit ((k N + n)(M+1) + m), m = 0..M.
  std::vector<std::uint8_t> packed;
  // Shots in leakage after cycle m, m = 0..M, summed over randomizations.
  std::vector<std::uint64_t> leaked_counts;

  bool outcome(int k, int n, int m) const;
};

// Shot n of randomization k uses stream (seed, kShots + (k << 32) + n).
// r_0 is a readout of the prepared state with the same assignment error as
// every later readout. Results do not depend on `threads`.
RILBRun simulate_run(const RILBConfig& config, const ReadoutModel& model, const Sequences& sequences,
                     int threads = 1);

// o_m = r_(m-1) xor r_m, C_m = 1 - 2 (i_m xor o_m). `outcomes` holds r_0..r_M.
std::vector<int> decode(const std::vector<bool>& outcomes, const std::vector<bool>& inputs);

struct RILBResult {
  std::vector<double> mean_correlation;  // index m - 1
  std::vector<double> stderr_;           // average of the X-class and I-class standard deviations
  std::vector<double> mean_x;            // randomizations with i_m = X
  std::vector<double> mean_i;
  std::vector<int> count_x;
  std::vector<int> count_i;
  // Per-randomization shot averages, [k][m - 1]. Empty when the result was
  // read back from an aggregate table.
  std::vector<std::vector<double>> per_randomization;
};

// Per-randomization correlation sums S[k][m-1] = sum over shots of C_m.
std::vector<std::vector<std::int64_t>> correlation_sums(const RILBRun& run, int threads = 1);

RILBResult aggregate(const std::vector<std::vector<std::int64_t>>& sums, const Sequences& sequences, int n_shots);
RILBResult aggregate(const RILBRun& run, int threads = 1);

struct LeakageFitOptions {
  int bootstrap = 999;        // replicates for the no-decay test
  double significance = 0.05;
  std::uint64_t seed = 0;     // bootstrap stream
};

struct LeakageFit {
  FitResult fit;  // (A, B, L)
  bool resolved = true;  // the no-decay test rejected at the chosen significance
  double decay_p_value = 0.0;
  bool clamped = false;  // L forced to 0 (negative estimate or no decay to resolve)
  bool pinned = false;   // A or A + B held at the +-2 limit (nearly linear decay)
  // 95 % profile-likelihood interval for L with A and B profiled out inside
  // their physical range. Unlike rate_stderr() it stays meaningful when L is
  // poorly identified.
  std::array<double, 2> rate_interval{0.0, 0.0};

  double a() const { return fit.parameters[0]; }
  double b() const { return fit.parameters[1]; }
  double rate() const { return fit.parameters[2]; }
  double rate_stderr() const { return fit.stderr_of(2); }
};

// Weighted fit of <C>_m = (A + B (1 - L)^m) / 2 with weights 1 / stderr^2.
// A / 2 and (A + B) / 2 are kept inside [-1, 1]; a free fit that leaves that
// range is redone with the offending amplitude held at the limit.
//
// Before fitting, the decay is tested against a constant: the statistic is the
// largest cost reduction any decay rate buys, and its null distribution comes
// from resampling the centred per-randomization curves (or, without them,
// independent normal noise of size stderr / sqrt(K)). B is unidentified under
// the null, so a plain chi-square cut on that statistic would find decays in
// flat data far too often. An unresolved decay is reported as L = 0, B = 0,
// clamped, with rate_interval running from 0 to the profile upper bound.
LeakageFit fit_leakage(const RILBResult& result, const LeakageFitOptions& options = {});

// Leaked population after m cycles of the two-level leakage superoperator.
double superoperator_leakage(const LeakageModel& model, int m, double p_ini);

}  // namespace rokit

#endif  // ROKIT_RILB_HPP
