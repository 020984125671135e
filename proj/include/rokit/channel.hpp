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


#ifndef ROKIT_CHANNEL_HPP
#define ROKIT_CHANNEL_HPP

#include <array>
#include <complex>
#include <vector>

#include "rokit/random.hpp"

namespace rokit {

enum class Qubit { g = 0, e = 1 };
enum class Post { g = 0, e = 1, leaked = 2 };

// Joint table P(s', x | s) for s in {g, e}, s' in {g, e, l_s}, x in {0, 1},
// plus the readout response of the two aggregate leakage states.
struct ReadoutChannel {
  using Table = std::array<std::array<double, 2>, 3>;  // [post][outcome]
  std::array<Table, 2> joint{};                        // [input]
  double p0_leaked_g = 1.0;                            // P(0 | l_g)
  double p0_leaked_e = 0.0;                            // P(0 | l_e)

  double& p(Qubit in, Post post, int outcome) {
    return joint[static_cast<int>(in)][static_cast<int>(post)][outcome];
  }
  double p(Qubit in, Post post, int outcome) const {
    return joint[static_cast<int>(in)][static_cast<int>(post)][outcome];
  }
  // Marginal outcome probability P(x | s).
  double outcome(Qubit in, int x) const;
  // P(x | l_s) for the leakage state reached from input s.
  double leaked_outcome(Qubit in, int x) const;

  // Throws ValidationError naming the offending row.
  void validate(double tol = 1e-12) const;

  static ReadoutChannel identity();
};

struct ChannelMetrics {
  struct Values {
    double fidelity = 0.0;      // F
    double repeatability = 0.0; // R
    double qndness = 0.0;       // Q
    double qnd_fidelity = 0.0;  // F^QND
    double xi = 0.0;            // overlooked-error term
    double leakage = 0.0;       // L
  };
  Values g, e, mean;
};

// Throws NumericalError when F_g or F_e is zero.
ChannelMetrics metrics_from_channel(const ReadoutChannel& ch);

// joint[x1][x2] = P(x1, x2 | input) for two back-to-back readouts with the same table.
std::array<std::array<double, 2>, 2> two_readout_enumerate(const ReadoutChannel& ch, Qubit input);

//
// IQ-plane signal model
//

struct IQModel {
  std::complex<double> center_g;
  std::complex<double> center_e;
  std::vector<std::complex<double>> leak_centers;  // l_g first, then l_e; empty means "on e"
  double sigma = 1.0;
  double threshold = 0.0;
  double projection_phase = 0.0;

  // Midpoint threshold on the axis joining the g and e centers.
  static IQModel midpoint(std::complex<double> g, std::complex<double> e, double sigma,
                          std::vector<std::complex<double>> leaks = {});

  void validate() const;
  double project(std::complex<double> z) const;
  int classify(std::complex<double> z) const;  // 1 on the e side of the threshold
  // Analytic P(outcome = 1) for a blob centered at `center` with this model's sigma.
  double p_one(std::complex<double> center) const;
  // Leakage blob reached from input s.
  std::complex<double> leak_center(Qubit from) const;
  // Squared separation of the projected g/e means over sigma^2.
  double snr() const;
};

struct IQBlob {
  enum Kind { g, e, leaked } kind = g;
  std::size_t leak_index = 0;
};

struct IQSample {
  std::complex<double> point;
  int outcome = 0;
};

IQSample sample_iq(const IQModel& model, IQBlob state, RandomStream& stream);

// Threshold minimizing (P(1|g) + P(0|e)) / 2 by golden-section search.
double optimal_threshold(const IQModel& model);

// Per-readout transition probabilities. A share window_fraction of each
// happens at a uniformly random time inside the integration window; the rest
// happens after it (ring-down) and changes only the post-state.
struct TransitionRates {
  double g_to_e = 0.0;
  double g_to_leak = 0.0;
  double e_to_g = 0.0;
  double e_to_leak = 0.0;
  double window_fraction = 1.0;

  void validate() const;
};

// Builds the joint table. snr > 0 rescales sigma so that the projected g/e
// separation is sqrt(snr) sigma; snr = +inf is noiseless; snr <= 0 keeps
// iq.sigma.
ReadoutChannel channel_from_physics(double snr, const TransitionRates& rates, const IQModel& iq);

}  // namespace rokit

#endif  // ROKIT_CHANNEL_HPP
