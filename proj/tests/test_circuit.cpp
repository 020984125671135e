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

#include "rokit/circuit.hpp"
#include "rokit/io.hpp"

using namespace rokit;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
double mhz(double v) { return kTwoPi * 1e6 * v; }
double ghz(double v) { return kTwoPi * 1e9 * v; }

Netlist preset(const char* name) {
  return io::netlist_from_json(io::json::parse(io::read_text(std::string(ROKIT_SOURCE_DIR) + "/configs/netlists/" + name)));
}

// Log-log slope of T1 against lambda between two asymmetries.
double loglog_slope(const LumpedCircuit& lo, const LumpedCircuit& hi, double lambda_lo, double lambda_hi,
                    const std::vector<int>& focus) {
  const double t_lo = purcell_t1(lo, ghz(6.28), focus).t1;
  const double t_hi = purcell_t1(hi, ghz(6.28), focus).t1;
  return std::log(t_hi / t_lo) / std::log(lambda_hi / lambda_lo);
}

}  // namespace

TEST_CASE("dimon spectrum") {
  const auto s = dimon_spectrum_from_energies(183e6, 101e6, 14.832e9, mhz(463), ghz(7.5));
  CHECK(s.chi_qm / mhz(1) == doctest::Approx(-2.0 * std::sqrt(183.0 * 101.0)).epsilon(1e-12));
  CHECK(std::abs(s.chi_qm / mhz(-272) - 1.0) < 1e-3);
  CHECK(s.delta_q == doctest::Approx(mhz(-183)));
  CHECK(s.transmon_regime);

  DimonParams p;
  p.ej1 = p.ej2 = 15e9;
  p.c_j1 = p.c_j2 = 50e-15;
  p.c_s = 0.0;
  const auto flat = dimon_spectrum(p);
  CHECK(flat.e_cq == doctest::Approx(flat.e_cm).epsilon(1e-15));
  p.c_s = 20e-15;
  CHECK(dimon_spectrum(p).e_cm < dimon_spectrum(p).e_cq);
  p.ej1 = -1.0;
  CHECK_THROWS_AS(dimon_spectrum(p), ValidationError);

  CHECK(mediated_chi_mr(mhz(100), ghz(-1), mhz(200)) / mhz(1) == doctest::Approx(-0.004e3 / 1.2));
}

TEST_CASE("cross-Kerr identity holds for any charging energies") {
  for (double ecq = 50e6; ecq < 400e6; ecq += 37e6) {
    for (double ecm = 30e6; ecm < 300e6; ecm += 41e6) {
      const auto s = dimon_spectrum_from_energies(ecq, ecm, 20e9, mhz(300), ghz(7));
      CHECK(std::abs(std::abs(s.chi_qm) - 2.0 * std::sqrt(s.delta_q * s.delta_m)) <= 1e-12 * std::abs(s.chi_qm));
    }
  }
}

TEST_CASE("chi_qr ignores the qubit-resonator detuning, a transmon's does not") {
  const auto s = dimon_spectrum_from_energies(183e6, 101e6, 14.832e9, mhz(463), ghz(7.5));
  CHECK(chi_qr_detuning_invariance(s, mhz(500)) == s.chi_qr);
  CHECK(chi_qr_detuning_invariance(s, mhz(-500)) == s.chi_qr);
  const double before = transmon_chi(mhz(100), s.omega_q - s.omega_r, s.delta_q);
  const double after = transmon_chi(mhz(100), s.omega_q + mhz(500) - s.omega_r, s.delta_q);
  CHECK(std::abs(after / before - 1.0) > 0.1);

  const double g = invert_chi_qr(mhz(-6.4), s.delta_mr, s.chi_qm);
  CHECK(mediated_chi_qr(g, s.delta_mr, s.chi_qm) == doctest::Approx(mhz(-6.4)).epsilon(1e-12));
}

TEST_CASE("exact diagonalization against the perturbative shifts") {
  const auto base = dimon_spectrum_from_energies(183e6, 101e6, 14.832e9, 0.0, ghz(7.5));
  const auto uncoupled = numeric_dispersive_check(base, {4, 4, 4});
  CHECK(std::abs(uncoupled.chi_qr) < 1e-9 * std::abs(base.chi_qm));

  const auto weak = dimon_spectrum_from_energies(183e6, 101e6, 14.832e9, 0.05 * std::abs(base.delta_mr), ghz(7.5));
  CHECK(std::abs(numeric_dispersive_check(weak, {6, 6, 6}).chi_qr / weak.chi_qr - 1.0) < 0.02);

  const double g = invert_chi_qr(mhz(-6.4), base.delta_mr, base.chi_qm);
  const auto device = dimon_spectrum_from_energies(183e6, 101e6, 14.832e9, g, ghz(7.5));
  const auto small = numeric_dispersive_check(device, {6, 6, 8});
  const auto large = numeric_dispersive_check(device, {8, 8, 10});
  CHECK(std::abs(small.chi_qr / device.chi_qr - 1.0) < 0.15);
  CHECK(std::abs(large.chi_qr / small.chi_qr - 1.0) < 0.005);
  CHECK(std::abs(large.chi_mr / small.chi_mr - 1.0) < 0.005);
  CHECK_THROWS_AS(numeric_dispersive_check(device, {3, 6, 6}), ValidationError);
}

TEST_CASE("parallel RLC decays at 1/RC") {
  const double r = 2e5, l = 10e-9, c = 100e-15;
  Netlist n;
  n.nodes = {"a"};
  n.elements = {{'C', 1, 0, c, 0}, {'L', 1, 0, l, 0}, {'R', 1, 0, r, 0}};
  const auto circuit = build_circuit(n);
  const double omega0 = 1.0 / std::sqrt(l * c);
  const auto res = purcell_t1(circuit, omega0);
  CHECK(std::abs(res.t1 / (r * c) - 1.0) < 1e-9);
  // The damped frequency is sqrt(omega0^2 - (1/2RC)^2).
  CHECK(res.omega == doctest::Approx(std::sqrt(omega0 * omega0 - std::pow(0.5 / (r * c), 2))).epsilon(1e-9));

  n.elements.pop_back();
  for (const auto& mode : eigenmodes(build_circuit(n))) CHECK(mode.gamma <= 1e-10 * mode.omega);
}

TEST_CASE("dimon Purcell decay against junction asymmetry") {
  const Netlist net = preset("dimon_resonator.json");
  const auto sym = build_circuit(net, 0.0);
  const std::vector<int> focus{sym.node("d1"), sym.node("d2")};
  const auto qubit = purcell_t1(sym, ghz(6.28), focus);
  const auto resonator = purcell_t1(sym, ghz(7.5));
  CHECK(qubit.gamma <= 1e-6 * resonator.gamma);

  const double slope = loglog_slope(build_circuit(net, 1e-3), build_circuit(net, 1e-1), 1e-3, 1e-1, focus);
  CHECK(std::abs(slope + 2.0) < 0.1);
  const double t_2 = purcell_t1(build_circuit(net, 0.02), ghz(6.28), focus).t1;
  const double t_1 = purcell_t1(build_circuit(net, 0.01), ghz(6.28), focus).t1;
  CHECK(std::abs(t_1 / t_2 / 4.0 - 1.0) < 0.1);

  const Netlist filter = preset("dimon_filter.json");
  const auto fsym = build_circuit(filter, 0.0);
  const std::vector<int> ffocus{fsym.node("d1"), fsym.node("d2")};
  const double fslope = loglog_slope(build_circuit(filter, 1e-3), build_circuit(filter, 1e-1), 1e-3, 1e-1, ffocus);
  CHECK(std::abs(fslope + 2.0) < 0.1);
}

TEST_CASE("netlists round trip and reject bad input") {
  const Netlist net = preset("dimon_resonator.json");
  const auto again = io::netlist_from_json(io::netlist_to_json(net));
  CHECK(again.nodes == net.nodes);
  REQUIRE(again.elements.size() == net.elements.size());
  for (std::size_t i = 0; i < net.elements.size(); ++i) {
    CHECK(again.elements[i].type == net.elements[i].type);
    CHECK(again.elements[i].a == net.elements[i].a);
    CHECK(again.elements[i].b == net.elements[i].b);
    CHECK(again.elements[i].value == net.elements[i].value);
    CHECK(again.elements[i].asymmetry == net.elements[i].asymmetry);
  }
  Netlist bad = net;
  bad.elements[0].value = 0.0;
  CHECK_THROWS_AS(build_circuit(bad), ValidationError);
  bad = net;
  bad.elements[0].type = 'Q';
  CHECK_THROWS_AS(build_circuit(bad), ValidationError);
  CHECK_THROWS_AS(build_circuit(net, 1.0), ValidationError);
  CHECK_THROWS_AS(build_circuit(net).node("nope"), ValidationError);
}

TEST_CASE("Rabi rates to Purcell decay") {
  CHECK(rabi_to_purcell(ghz(5), 0.0, 1e-12) == 0.0);
  CHECK(rabi_to_purcell(ghz(5), 2.0 * mhz(0.04), 1e-12) ==
        doctest::Approx(4.0 * rabi_to_purcell(ghz(5), mhz(0.04), 1e-12)).epsilon(1e-14));
  CHECK_THROWS_AS(rabi_to_purcell(ghz(5), 1.0, 0.0), ValidationError);
  const double t1 = purcell_t1_from_reference(0.34e-3, ghz(4.633), mhz(0.0417), ghz(6.271), mhz(0.0412), 1e4);
  CHECK(std::abs(t1 / 2.6 - 1.0) < 0.05);
}

TEST_CASE("thermal populations") {
  const std::vector<double> levels{0.0, 4.633e9, 6.271e9, 9.165e9};
  const auto p = thermal_populations(levels, 51e-3);
  double total = 0.0;
  for (double v : p) total += v;
  CHECK(std::abs(total - 1.0) < 1e-14);
  CHECK(std::abs(p[1] / 0.0130 - 1.0) < 0.1);
  CHECK(std::abs(p[2] / 0.0026 - 1.0) < 0.1);
  CHECK(thermal_populations(levels, 1e-4)[0] == doctest::Approx(1.0));
  const std::vector<double> pair{3e9, 3e9};
  CHECK(thermal_populations(pair, 0.05)[0] == doctest::Approx(0.5));
  CHECK_THROWS_AS(thermal_populations(levels, 0.0), ValidationError);
}

TEST_CASE("emission reflection model and fit") {
  EmissionParams e{2e3, 5e4, 0.0, ghz(4.633)};
  CHECK(emission_s11(e.omega_m, e) == std::complex<double>(1.0 - e.gamma1 / e.gamma2, 0.0));
  CHECK(std::abs(emission_s11(e.omega_m + 1e6 * e.gamma2, e) - 1.0) < 1e-7);

  // T1 = 0.34 ms after the thermal correction with r_th = P(1m) / P(0).
  const double r_th = 0.013 / 0.974;
  e.gamma1 = (1.0 - r_th) / (1.0 + r_th) / 0.34e-3;
  e.gamma2 = 4.0 * e.gamma1;
  e.saturation = 0.3;
  std::vector<EmissionPoint> data;
  for (int i = -40; i <= 40; ++i) {
    const double w = e.omega_m + 0.15 * i * e.gamma2;
    data.push_back({w, emission_s11(w, e)});
  }
  const auto fit = fit_emission(data, {1.5 * e.gamma1, 0.7 * e.gamma2, 0.1, e.omega_m + 0.3 * e.gamma2});
  CHECK(fit.converged);
  CHECK(std::abs(emission_t1(fit.parameters[0], r_th) / 0.34e-3 - 1.0) < 0.01);
  CHECK(fit.parameters[3] == doctest::Approx(e.omega_m).epsilon(1e-12));
}
