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


#include <doctest.h>

#include <cmath>
#include <vector>

#include "rokit/random.hpp"
#include "rokit/resonator.hpp"

using namespace rokit;

namespace {

ResonatorParams nominal() { return ResonatorParams::from_hz(12e6, 11.6e6, 0.4e6, -60e3, -6.4e6, {162.0, 0.0}); }

// Photon number of the driven Kerr oscillator by bisection; valid where the
// response has a single branch.
double bisect_photons(double kerr, double kappa, double detuning, double drive) {
  auto f = [&](double n) {
    return n * ((detuning + kerr * n) * (detuning + kerr * n) + 0.25 * kappa * kappa) - drive * drive;
  };
  double lo = 0.0, hi = 1.0;
  while (f(hi) < 0.0) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<CalibrationPoint> synthetic_stark(double noise, std::uint64_t seed) {
  const double kerr = hz_to_rad(-60e3), kappa = hz_to_rad(12e6), k_sca = 162.0;
  RandomStream stream(seed, 0);
  std::vector<CalibrationPoint> data;
  for (double d : {-20e6, -12e6, -6e6, -2e6, 0.0, 2e6, 6e6, 12e6, 20e6}) {
    for (double a : {0.05, 0.1, 0.15, 0.2}) {
      const double n = bisect_photons(kerr, kappa, hz_to_rad(d), drive_rate(k_sca, a));
      data.push_back({hz_to_rad(d), a, n * (1.0 + noise * stream.normal())});
    }
  }
  return data;
}

}  // namespace

TEST_CASE("resonator parameter invariant") {
  CHECK_NOTHROW(nominal().validate());
  auto bad = nominal();
  bad.kappa_ext = hz_to_rad(13e6);
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("linear steady state is a Lorentzian") {
  auto p = nominal();
  p.kerr = 0.0;
  const double delta = hz_to_rad(3e6);
  const cplx a = hz_to_rad(2e6);
  const auto ss = steady_state(p, delta, a);
  REQUIRE(ss.size() == 1);
  CHECK(ss[0].photons == doctest::Approx(std::norm(a) / (delta * delta + 0.25 * p.kappa_r * p.kappa_r)));
  CHECK(std::norm(ss[0].alpha) == doctest::Approx(ss[0].photons));
}

TEST_CASE("kerr steady states satisfy the fixed point") {
  auto p = nominal();
  p.kerr = hz_to_rad(-1e6);
  const double delta = hz_to_rad(20e6);
  const cplx a = hz_to_rad(31.6e6);
  const auto ss = steady_state(p, delta, a);
  REQUIRE(ss.size() == 3);  // bistable for this drive
  for (const auto& s : ss) {
    const cplx residual = -(cplx(0.0, delta + p.kerr * s.photons) + 0.5 * p.kappa_r) * s.alpha + a;
    CHECK(std::abs(residual) < 1e-9 * std::abs(a));
    CHECK(std::norm(s.alpha) == doctest::Approx(s.photons).epsilon(1e-9));
  }
  CHECK(ss[0].photons < ss[1].photons);
  CHECK(ss[1].photons < ss[2].photons);
}

TEST_CASE("boxcar ring-up matches the linear solution") {
  auto p = nominal();
  p.kerr = 0.0;
  ShapedPulse pulse;
  pulse.detuning_hz = 1e6;
  pulse.segments = {{{1.5e6, 0.5e6}, 200.0}};
  const auto traj = simulate_trajectories(p, pulse, 0.0);
  const double t = traj.times.back();
  CHECK(t == doctest::Approx(200e-9));
  const cplx a = pulse.segments[0].amplitude();
  for (int branch = 0; branch < 2; ++branch) {
    const double delta = pulse.detuning() + (branch == 0 ? -0.5 : 0.5) * p.chi_qr;
    const cplx rate(0.5 * p.kappa_r, delta);
    const cplx exact = a / rate * (1.0 - std::exp(-rate * t));
    const cplx got = branch == 0 ? traj.alpha_g.back() : traj.alpha_e.back();
    CHECK(std::abs(got - exact) < 1e-8 * std::abs(exact));
  }
}

TEST_CASE("free decay in the tail") {
  auto p = nominal();
  ShapedPulse pulse;
  pulse.segments = {{{2e6, 0.0}, 100.0}};
  const auto traj = simulate_trajectories(p, pulse, 5.0 / p.kappa_r);
  const std::size_t end = traj.times.size() - 1;
  std::size_t at_pulse_end = 0;
  while (traj.times[at_pulse_end] < 100e-9 - 1e-15) ++at_pulse_end;
  const double ratio = std::norm(traj.alpha_g[end]) / std::norm(traj.alpha_g[at_pulse_end]);
  CHECK(ratio == doctest::Approx(std::exp(-5.0)).epsilon(1e-6));
}

TEST_CASE("ionization guard") {
  auto p = nominal();
  ShapedPulse pulse;
  pulse.segments = {{{100e6, 0.0}, 200.0}};
  SimulationOptions options;
  options.ionization_photons = 50.0;
  CHECK_THROWS_AS(simulate_trajectories(p, pulse, 0.0, options), IonizationRegime);
}

TEST_CASE("measurement rate is normalized") {
  ShapedPulse pulse;
  pulse.segments = {{{2e6, 0.0}, 100.0}};
  const auto rate = measurement_rate(simulate_trajectories(nominal(), pulse, 1e-7));
  double peak = 0.0;
  for (double r : rate) peak = std::max(peak, r);
  CHECK(peak == 1.0);
  CHECK(rate.front() == 0.0);

  auto p = nominal();
  p.chi_qr = 0.0;
  CHECK_THROWS_AS(measurement_rate(simulate_trajectories(p, pulse, 0.0)), DegenerateReadout);
}

TEST_CASE("photon calibration round trip, noiseless") {
  const auto data = synthetic_stark(0.0, 0);
  const auto cal = calibrate_photon_number(data, hz_to_rad(-40e3), hz_to_rad(10e6), 140.0);
  CHECK(std::abs(cal.kerr() / hz_to_rad(-60e3) - 1.0) < 1e-3);
  CHECK(std::abs(cal.kappa_r() / hz_to_rad(12e6) - 1.0) < 1e-3);
  CHECK(std::abs(cal.k_sca() / 162.0 - 1.0) < 1e-3);
  CHECK_FALSE(cal.kerr_consistent_with_zero);
}

TEST_CASE("photon calibration round trip, 1% noise") {
  const auto data = synthetic_stark(0.01, 1);
  const auto cal = calibrate_photon_number(data, hz_to_rad(-40e3), hz_to_rad(10e6), 140.0);
  CHECK(std::abs(cal.kerr() / hz_to_rad(-60e3) - 1.0) < 0.05);
  CHECK(std::abs(cal.kappa_r() / hz_to_rad(12e6) - 1.0) < 0.05);
  CHECK(std::abs(cal.k_sca() / 162.0 - 1.0) < 0.05);
}

TEST_CASE("photon calibration needs enough distinct points") {
  std::vector<CalibrationPoint> data{{0.0, 0.01, 1.0}, {1e6, 0.01, 1.0}, {1e6, 0.02, 1.0}};
  CHECK_THROWS_AS(calibrate_photon_number(data, 0.0, 1e7, 100.0), ValidationError);
}

TEST_CASE("snr slope and efficiency fit") {
  const auto p = nominal();
  const double slope = snr_slope(p, 2.8, 0.79);
  // eta n kappa_ext 8 chi^2 / (chi^2 + kappa^2), evaluated by hand in ns^-1.
  const double chi = -6.4, kappa = 12.0, kext = 11.6;
  const double by_hand = 0.79 * 2.8 * (kTwoPi * kext * 1e-3) * 8.0 * chi * chi / (chi * chi + kappa * kappa);
  CHECK(slope * 1e-9 == doctest::Approx(by_hand).epsilon(1e-12));

  std::vector<SnrPoint> pts;
  for (double tau : {50e-9, 100e-9, 200e-9, 400e-9}) pts.push_back({tau, snr_slope(p, 2.8, 0.6) * tau});
  const auto fit = fit_efficiency(pts, p, 2.8);
  CHECK(fit.parameters[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK_THROWS_AS(fit_efficiency(std::vector<SnrPoint>(pts.begin(), pts.begin() + 2), p, 2.8), ValidationError);
}
