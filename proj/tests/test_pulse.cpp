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

#include <Eigen/Dense>

#include "rokit/pulse.hpp"
#include "rokit/io.hpp"

using namespace rokit;

namespace {

ResonatorParams nominal() { return ResonatorParams::from_hz(12e6, 11.6e6, 0.4e6, -60e3, -6.4e6); }

template <class F>
double simpson(F f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Closed-form linear response of one branch to a drive switched on at t = 0.
cplx ring_up(cplx a, cplx rate, double t) { return a / rate * (1.0 - std::exp(-rate * t)); }

}  // namespace

TEST_CASE("boxcar objective matches the linear closed form") {
  auto p = nominal();
  p.kerr = 0.0;
  const double tau = 160e-9;
  const ShapedPulse pulse = boxcar(hz_to_rad(3e6), tau, 0.0);
  const PulseConstraint c{100.0, tau, 1};
  const PulseObjective o = evaluate_objective(p, pulse, c);

  const cplx a = pulse.segments[0].amplitude();
  const cplx rg(0.5 * p.kappa_r, -0.5 * p.chi_qr), re(0.5 * p.kappa_r, 0.5 * p.chi_qr);
  auto sep_in = [&](double t) { return std::norm(ring_up(a, rg, t) - ring_up(a, re, t)); };
  const cplx g_end = ring_up(a, rg, tau), e_end = ring_up(a, re, tau);
  auto sep_out = [&](double t) {
    return std::norm(g_end * std::exp(-rg * (t - tau)) - e_end * std::exp(-re * (t - tau)));
  };
  const double expected = simpson(sep_out, tau, tau + 10.0 / p.kappa_r) / simpson(sep_in, 0.0, tau);
  CHECK(std::abs(o.theta / expected - 1.0) < 0.02);
  CHECK_FALSE(o.exceeds_cap);
}

TEST_CASE("a pulse that returns both branches to the origin has no tail") {
  auto p = nominal();
  p.kerr = 0.0;
  const double lengths[] = {100e-9, 30e-9, 30e-9};
  const cplx a1 = hz_to_rad(4e6);
  const cplx rates[] = {{0.5 * p.kappa_r, -0.5 * p.chi_qr}, {0.5 * p.kappa_r, 0.5 * p.chi_qr}};
  // Final field = sum_j A_j (1 - exp(-r l_j)) / r * exp(-r * (time after segment j)).
  auto coef = [&](int b, int j) {
    double after = 0.0;
    for (int k = j + 1; k < 3; ++k) after += lengths[k];
    return (1.0 - std::exp(-rates[b] * lengths[j])) / rates[b] * std::exp(-rates[b] * after);
  };
  Eigen::Matrix2cd m;
  Eigen::Vector2cd rhs;
  for (int b = 0; b < 2; ++b) {
    m(b, 0) = coef(b, 1);
    m(b, 1) = coef(b, 2);
    rhs(b) = -coef(b, 0) * a1;
  }
  const Eigen::Vector2cd sol = m.partialPivLu().solve(rhs);

  ShapedPulse pulse;
  // The first drive is split in two so the pulse has four segments.
  pulse.segments = {{a1 / kTwoPi, 50.0}, {a1 / kTwoPi, 50.0}, {sol(0) / kTwoPi, 30.0}, {sol(1) / kTwoPi, 30.0}};
  const PulseObjective o = evaluate_objective(p, pulse, {1e3, 160e-9, 4});
  CHECK(o.theta < 1e-3);
  CHECK(o.residual_n < 1e-6);
}

TEST_CASE("zero drive has no measurement") {
  const PulseConstraint c{2.8, 160e-9, 1};
  CHECK_THROWS_AS(evaluate_objective(nominal(), boxcar(0.0, 160e-9, 0.0), c), NumericalError);
}

TEST_CASE("objective symmetries") {
  const auto p = nominal();
  ShapedPulse pulse;
  pulse.detuning_hz = 1.3e6;
  pulse.segments = {{{9e6, 2e6}, 30.0}, {{3e6, -1e6}, 90.0}, {{-7e6, 1e6}, 20.0}, {{-2e6, -4e6}, 20.0}};
  const PulseConstraint c{50.0, 160e-9, 4};
  const PulseObjective base = evaluate_objective(p, pulse, c);

  ShapedPulse rotated = pulse;
  for (auto& s : rotated.segments) s.amplitude_hz *= std::polar(1.0, 0.7);
  CHECK(evaluate_objective(p, rotated, c).theta == doctest::Approx(base.theta).epsilon(1e-9));

  // Complex conjugation maps (Delta0, K) to (-Delta0, -K) and swaps the branches.
  ShapedPulse mirrored = pulse;
  mirrored.detuning_hz = -pulse.detuning_hz;
  for (auto& s : mirrored.segments) s.amplitude_hz = std::conj(s.amplitude_hz);
  auto flipped = p;
  flipped.kerr = -p.kerr;
  const PulseObjective m = evaluate_objective(flipped, mirrored, c);
  CHECK(m.theta == doctest::Approx(base.theta).epsilon(1e-9));
  CHECK(m.peak_n == doctest::Approx(base.peak_n).epsilon(1e-9));
}

TEST_CASE("boxcar peak follows the steady state") {
  const auto p = nominal();
  // Drive that holds the g branch at 1.2 photons in steady state.
  const double n = 1.2;
  const double dg = -0.5 * p.chi_qr;
  const double a = std::sqrt(n * ((dg + p.kerr * n) * (dg + p.kerr * n) + 0.25 * p.kappa_r * p.kappa_r));
  const ShapedPulse pulse = boxcar(a, 240e-9, 0.0);
  const PulseObjective o = evaluate_objective(p, pulse, {10.0, 240e-9, 1});
  double predicted = 0.0;
  for (double d : {dg, -dg}) {
    for (const auto& s : steady_state(p, d, a)) predicted = std::max(predicted, s.photons);
  }
  CHECK(std::abs(o.peak_n / predicted - 1.0) < 0.05);
}

TEST_CASE("boxcar serialization round trip") {
  const ShapedPulse pulse = boxcar({1.234567e6, -0.5e6}, 160e-9, 0.0);
  const std::string text = io::pulse_text(pulse);
  const ShapedPulse back = io::pulse_from_json(io::json::parse(text));
  CHECK(back == pulse);
  CHECK(io::pulse_text(back) == text);
  CHECK_NOTHROW(boxcar(0.0, 160e-9, 0.0).validate());
}

TEST_CASE("two-segment optimum boosts the ring-up") {
  auto p = nominal();
  p.kerr = 0.0;
  const PulseConstraint c{2.8, 160e-9, 2};
  PulseSearchOptions options;
  options.restarts = 6;
  const OptimizedPulse best = optimize_pulse(p, c, RandomStream(3, 0), options);
  REQUIRE(best.pulse.segments.size() == 2);
  CHECK(std::abs(best.pulse.segments[0].amplitude_hz) > std::abs(best.pulse.segments[1].amplitude_hz));
  CHECK(best.pulse.duration() == doctest::Approx(160e-9).epsilon(1e-12));
}

TEST_CASE("optimizer trace, feasibility and determinism") {
  const auto p = nominal();
  const PulseConstraint c{2.8, 160e-9, 4};
  PulseSearchOptions options;
  options.restarts = 4;
  options.max_evaluations = 1200;
  const OptimizedPulse a = optimize_pulse(p, c, RandomStream(5, 0), options);
  for (std::size_t i = 1; i < a.trace.size(); ++i) CHECK(a.trace[i] <= a.trace[i - 1]);
  for (const auto& s : a.pulse.segments) CHECK(s.length_ns >= 2.0 - 1e-9);
  const PulseObjective again = evaluate_objective(p, a.pulse, c);
  CHECK(again.peak_n <= c.n_max * (1.0 + 1e-6));
  CHECK(again.theta == a.objective.theta);

  options.threads = 3;
  const OptimizedPulse b = optimize_pulse(p, c, RandomStream(5, 0), options);
  CHECK(b.pulse == a.pulse);
  CHECK(b.best_restart == a.best_restart);
}

TEST_CASE("infeasible cap") {
  const auto p = nominal();
  PulseConstraint c{2.8, 160e-9, 3};
  CHECK_THROWS_AS(optimize_pulse(p, c, RandomStream(0, 0)), ValidationError);
  c.segment_count = 4;
  c.tau_ro = 6e-9;
  CHECK_THROWS_AS(optimize_pulse(p, c, RandomStream(0, 0)), ValidationError);
}

TEST_CASE("unbounded cap converges for every seed") {
  // Four complex segments can empty both branches exactly, so the optimum is
  // theta = 0 and every seed should get there.
  const auto p = nominal();
  const PulseConstraint c{1e4, 400e-9, 4};
  PulseSearchOptions options;
  options.restarts = 4;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const OptimizedPulse r = optimize_pulse(p, c, RandomStream(seed, 0), options);
    CHECK(r.objective.theta < 1e-6);
  }
}
