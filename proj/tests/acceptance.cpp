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


// Acceptance suite: one PASS or FAIL line per criterion. Tolerances are fixed
// here and nowhere else. Exit status is non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <fmt/core.h>

#include "rokit/channel.hpp"
#include "rokit/circuit.hpp"
#include "rokit/io.hpp"
#include "rokit/pulse.hpp"
#include "rokit/random.hpp"
#include "rokit/resonator.hpp"
#include "rokit/rilb.hpp"
#include "rokit/session.hpp"

using namespace rokit;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double rel(double value, double target) { return std::abs(value / target - 1.0); }

const std::string kSource = ROKIT_SOURCE_DIR;

// 1. Median fitted leakage over seeds 0..9 at each preset rate.
Verdict rilb_recovery() {
  constexpr double kSmallTol = 0.25, kLargeTol = 0.10, kBudget = 60.0;
  const std::vector<double> rates{0.0012, 0.0048, 0.0214, 0.0776};
  const auto t0 = Clock::now();
  std::vector<double> ratios;
  for (double rate : rates) {
    std::vector<double> fitted;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      RILBConfig c;
      c.m_cycles = 40;
      c.k_randomizations = 98;
      c.n_shots = 1000;
      c.seed = seed;
      CycleModel model;
      model.leakage.l_up = rate;
      model.leakage.p0_given_l = 0.0;
      LeakageFitOptions opt;
      opt.seed = seed;
      fitted.push_back(fit_leakage(aggregate(simulate_run(c, model, generate_sequences(c))), opt).rate());
    }
    std::sort(fitted.begin(), fitted.end());
    ratios.push_back(0.5 * (fitted[4] + fitted[5]) / rate);
  }
  const double elapsed = seconds_since(t0);
  const bool pass = std::abs(ratios.front() - 1.0) <= kSmallTol && std::abs(ratios.back() - 1.0) <= kLargeTol &&
                    elapsed < kBudget;
  return {pass, fmt::format("median/true = {:.3f} {:.3f} {:.3f} {:.3f} (smallest within {}, largest within {}); {:.1f} s",
                            ratios[0], ratios[1], ratios[2], ratios[3], kSmallTol, kLargeTol, elapsed)};
}

ReadoutChannel random_channel(RandomStream& rng) {
  ReadoutChannel ch;
  for (auto& table : ch.joint) {
    double sum = 0.0;
    for (auto& row : table) {
      for (double& v : row) sum += (v = -std::log(1.0 - rng.uniform()));
    }
    for (auto& row : table) {
      for (double& v : row) v /= sum;
    }
  }
  ch.p0_leaked_g = rng.uniform();
  ch.p0_leaked_e = rng.uniform();
  return ch;
}

// 2. R = F_qnd + Xi and R = Q - [P(g,1|g) + P(e,0|e)] / 2 + Xi.
Verdict channel_identities() {
  constexpr double kTol = 1e-12, kBudget = 5.0;
  const auto t0 = Clock::now();
  RandomStream rng(12, 0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const auto ch = random_channel(rng);
    const auto m = metrics_from_channel(ch);
    for (const auto* v : {&m.g, &m.e, &m.mean}) {
      worst = std::max(worst, std::abs(v->repeatability - (v->qnd_fidelity + v->xi)));
    }
    const double wrong = 0.5 * (ch.p(Qubit::g, Post::g, 1) + ch.p(Qubit::e, Post::e, 0));
    worst = std::max(worst, std::abs(m.mean.repeatability - (m.mean.qndness - wrong + m.mean.xi)));
  }
  const double elapsed = seconds_since(t0);
  return {worst <= kTol && elapsed < kBudget, fmt::format("worst deviation {:.2e} over 10^4 channels; {:.2f} s", worst, elapsed)};
}

// 3. Closed form against repeated 2x2 multiplication, and against Monte Carlo.
Verdict superoperator() {
  constexpr double kTol = 1e-12, kSigmas = 4.0;
  double worst = 0.0;
  for (int a = 0; a < 20; ++a) {
    for (int b = 0; b < 20; ++b) {
      LeakageModel lm;
      lm.l_up = 0.5 * a / 19.0;
      lm.l_down = 0.5 * b / 19.0;
      Eigen::Matrix2d s;
      s << 1.0 - lm.l_up, lm.l_down, lm.l_up, 1.0 - lm.l_down;
      Eigen::Vector2d p(1.0, 0.0);
      for (int m = 0; m <= 200; ++m) {
        worst = std::max(worst, std::abs(superoperator_leakage(lm, m, 0.0) - p(1)));
        p = s * p;
      }
    }
  }
  RILBConfig c;
  c.m_cycles = 40;
  c.k_randomizations = 1;
  c.n_shots = 10000;
  c.seed = 3;
  CycleModel model;
  model.leakage.l_up = 0.0776;
  model.leakage.l_down = 0.02;
  const auto run = simulate_run(c, model, generate_sequences(c));
  double worst_sigma = 0.0;
  for (int m = 1; m <= 40; ++m) {
    const double p = superoperator_leakage(model.leakage, m, 0.0);
    const double observed = static_cast<double>(run.leaked_counts[static_cast<std::size_t>(m)]) / 1e4;
    worst_sigma = std::max(worst_sigma, std::abs(observed - p) / std::sqrt(p * (1.0 - p) / 1e4));
  }
  return {worst <= kTol && worst_sigma <= kSigmas,
          fmt::format("matrix power {:.2e}; Monte Carlo worst {:.2f} sigma", worst, worst_sigma)};
}

// Photon number of the driven Kerr oscillator by bisection on the cubic.
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

// 4. Refit of synthetic Stark-shift data.
Verdict kerr_calibration() {
  constexpr double kNoiseless = 1e-3, kNoisy = 0.05;
  const double kerr = hz_to_rad(-60e3), kappa = hz_to_rad(12e6), k_sca = 162.0;
  auto worst_error = [&](double noise) {
    RandomStream stream(1, 0);
    std::vector<CalibrationPoint> data;
    for (double d : {-20e6, -12e6, -6e6, -2e6, 0.0, 2e6, 6e6, 12e6, 20e6}) {
      for (double a : {0.05, 0.1, 0.15, 0.2}) {
        const double n = bisect_photons(kerr, kappa, hz_to_rad(d), drive_rate(k_sca, a));
        data.push_back({hz_to_rad(d), a, n * (1.0 + noise * stream.normal())});
      }
    }
    const auto cal = calibrate_photon_number(data, hz_to_rad(-40e3), hz_to_rad(10e6), 140.0);
    return std::max({rel(cal.kerr(), kerr), rel(cal.kappa_r(), kappa), rel(cal.k_sca(), k_sca)});
  };
  const double clean = worst_error(0.0), noisy = worst_error(0.01);
  return {clean <= kNoiseless && noisy <= kNoisy,
          fmt::format("worst relative error {:.2e} noiseless, {:.4f} at 1 % noise", clean, noisy)};
}

// 5. Steady-state SNR slope.
Verdict snr() {
  constexpr double kTarget = 0.30, kTol = 0.05;
  const auto p = ResonatorParams::from_hz(12e6, 11.6e6, 0.4e6, 0.0, -6.4e6);
  const double slope = snr_slope(p, 2.8, 0.79) * 1e-9;
  return {rel(slope, kTarget) <= kTol, fmt::format("{:.4f} per ns against {}", slope, kTarget)};
}

// 6. Cross-Kerr identity and the measured chi_qm.
Verdict cross_kerr() {
  constexpr double kIdentity = 1e-12, kTarget = -272e6, kTol = 1e-3;
  double worst = 0.0;
  for (double ecq = 50e6; ecq <= 400e6; ecq += 25e6) {
    for (double ecm = 30e6; ecm <= 300e6; ecm += 30e6) {
      const auto s = dimon_spectrum_from_energies(ecq, ecm, 20e9, 0.0, hz_to_rad(7e9));
      worst = std::max(worst, rel(std::abs(s.chi_qm), 2.0 * std::sqrt(s.delta_q * s.delta_m)));
    }
  }
  const double chi = rad_to_hz(dimon_spectrum_from_energies(183e6, 101e6, 14.832e9, 0.0, hz_to_rad(7.5e9)).chi_qm);
  return {worst <= kIdentity && rel(chi, kTarget) <= kTol,
          fmt::format("identity {:.1e}; chi_qm = {:.2f} MHz against -272", worst, chi * 1e-6)};
}

// 7. Thermal populations at 51 mK.
Verdict thermal() {
  constexpr double kTol = 0.10;
  const std::vector<double> levels{0.0, 4.633e9, 6.271e9, 9.165e9};
  const auto p = thermal_populations(levels, 51e-3);
  return {rel(p[2], 0.0026) <= kTol && rel(p[1], 0.0130) <= kTol,
          fmt::format("P(1q0m) = {:.3f} %, P(0q1m) = {:.3f} % against 0.26 % and 1.30 %", 100 * p[2], 100 * p[1])};
}

// 8. Qubit Purcell T1 from the mediator's through the same port.
Verdict rabi_purcell() {
  constexpr double kTol = 0.05;
  const double t1 = purcell_t1_from_reference(0.34e-3, hz_to_rad(4.633e9), hz_to_rad(41.7e3), hz_to_rad(6.271e9),
                                              hz_to_rad(41.2e3), 1e4);
  return {rel(t1, 2.6) <= kTol, fmt::format("T1 = {:.3f} s against 2.6 s", t1)};
}

// 9. T1 against junction asymmetry on the dimon-resonator network.
Verdict purcell_scaling() {
  constexpr double kSlope = -2.0, kSlopeTol = 0.1, kSymmetry = 1e-6;
  const Netlist net = io::netlist_from_json(io::json::parse(io::read_text(kSource + "/configs/netlists/dimon_resonator.json")));
  const auto sym = build_circuit(net, 0.0);
  const std::vector<int> focus{sym.node("d1"), sym.node("d2")};
  const double target = hz_to_rad(6.28e9);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int k = 0; k <= 8; ++k) {
    const double lambda = std::pow(10.0, -3.0 + 0.25 * k);
    const double x = std::log(lambda), y = std::log(purcell_t1(build_circuit(net, lambda), target, focus).t1);
    sx += x, sy += y, sxx += x * x, sxy += x * y, ++n;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double ratio = purcell_t1(sym, target, focus).gamma / purcell_t1(sym, hz_to_rad(7.5e9)).gamma;
  return {std::abs(slope - kSlope) <= kSlopeTol && ratio <= kSymmetry,
          fmt::format("slope {:.3f}; qubit/resonator damping at lambda = 0: {:.1e}", slope, ratio)};
}

// 10. Optimized four-segment pulse against the best boxcar.
Verdict pulse_dominance() {
  constexpr double kResidual = 0.01, kBudget = 300.0;
  const auto params = ResonatorParams::from_hz(12e6, 11.6e6, 0.4e6, -60e3, -6.4e6);
  const PulseConstraint constraint{2.8, 160e-9, 4};
  const auto t0 = Clock::now();
  const double boxcar = best_boxcar(params, constraint).objective.theta;
  bool pass = true;
  double worst_theta = 0.0, worst_residual = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto best = optimize_pulse(params, constraint, RandomStream(seed, 0));
    pass = pass && best.objective.theta < boxcar && best.objective.residual_n < kResidual && !best.objective.exceeds_cap;
    worst_theta = std::max(worst_theta, best.objective.theta);
    worst_residual = std::max(worst_residual, best.objective.residual_n);
  }
  const double elapsed = seconds_since(t0);
  return {pass && elapsed < kBudget,
          fmt::format("worst theta {:.3e} against boxcar {:.3e}; worst residual {:.1e}; {:.0f} s", worst_theta, boxcar,
                      worst_residual, elapsed)};
}

// 11. Discrimination error alone: the 95 % interval for L contains 0.
Verdict no_false_decay() {
  constexpr int kRequired = 19;
  int contains = 0;
  std::string misses;
  for (std::uint64_t seed = 500; seed < 520; ++seed) {
    RILBConfig c;
    c.seed = seed;
    CycleModel model;
    model.assign_error_g = model.assign_error_e = 0.005;
    LeakageFitOptions opt;
    opt.seed = seed;
    const auto fit = fit_leakage(aggregate(simulate_run(c, model, generate_sequences(c))), opt);
    if (fit.rate_interval[0] <= 0.0) {
      ++contains;
    } else {
      misses += fmt::format(" {}", seed);
    }
  }
  return {contains >= kRequired, fmt::format("{}/20 intervals contain 0 (need {}); misses at seeds{}", contains,
                                             kRequired, misses.empty() ? " none" : misses)};
}

// 12. Byte-identical result files at 1 and 8 threads.
Verdict determinism() {
  const fs::path work = fs::temp_directory_path() / "rokit_acceptance_determinism";
  const std::vector<std::pair<std::string, std::string>> runs{
      {"simulate-rilb", "rilb/readout_160ns.json"}, {"optimize-pulse", "optimize_pulse.json"},
      {"channel-metrics", "channel_metrics.json"}, {"purcell-sweep", "purcell_dimon.json"},
      {"calibrate-photon", "calibrate_photon.json"}};
  int files = 0;
  std::string bad;
  for (const auto& [command, config] : runs) {
    const fs::path path = fs::path(kSource) / "configs" / config;
    const std::string text = io::read_text(path);
    std::vector<fs::path> dirs;
    for (int threads : {1, 8, 1}) {
      cli::RunOptions opt;
      opt.threads = threads;
      opt.output_dir = work / fmt::format("{}_{}_{}", command, threads, dirs.size());
      fs::remove_all(*opt.output_dir);
      if (cli::run(command, text, opt, path.parent_path()).exit_code != cli::kOk) bad += " " + command + "(failed)";
      dirs.push_back(*opt.output_dir);
    }
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      ++files;
      const auto name = entry.path().filename();
      const std::string ref = io::read_text(entry.path());
      for (std::size_t i = 1; i < dirs.size(); ++i) {
        if (!fs::exists(dirs[i] / name) || io::read_text(dirs[i] / name) != ref) bad += " " + command + "/" + name.string();
      }
    }
  }
  fs::remove_all(work);
  return {bad.empty() && files > 0,
          fmt::format("{} files from 5 commands compared across runs at 1, 8, 1 threads{}", files,
                      bad.empty() ? "" : "; differ:" + bad)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"RILB recovery at the preset rates", rilb_recovery},
      {"readout-channel identities", channel_identities},
      {"superoperator equivalence", superoperator},
      {"Kerr calibration round trip", kerr_calibration},
      {"SNR slope", snr},
      {"cross-Kerr identity", cross_kerr},
      {"thermal consistency", thermal},
      {"Rabi to Purcell", rabi_purcell},
      {"Purcell scaling", purcell_scaling},
      {"pulse optimizer dominance", pulse_dominance},
      {"no false decay", no_false_decay},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failed += v.pass ? 0 : 1;
    std::printf("%s %2zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu of %zu criteria pass\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
