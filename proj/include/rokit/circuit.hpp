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


#ifndef ROKIT_CIRCUIT_HPP
#define ROKIT_CIRCUIT_HPP

#include <array>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rokit/numerics.hpp"

namespace rokit {

namespace physical {
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kPlanck = 6.62607015e-34;             // J s
inline constexpr double kHbar = kPlanck / 6.283185307179586476925286766559;
inline constexpr double kBoltzmann = 1.380649e-23;            // J/K
inline constexpr double kReducedFluxQuantum = kHbar / (2.0 * kElementaryCharge);  // Wb
}  // namespace physical

// Energies are given as E/h in Hz.
struct DimonParams {
  double ej1 = 0.0;
  double ej2 = 0.0;
  double c_j1 = 0.0;   // F
  double c_j2 = 0.0;   // F
  double c_s = 0.0;    // F
  double g_mr = 0.0;   // rad/s
  double omega_r = 0.0;  // rad/s
  double ng_q = 0.0;   // offset charges, accepted and ignored
  double ng_m = 0.0;

  double asymmetry() const { return (ej1 - ej2) / (ej1 + ej2); }
  void validate() const;
};

struct DimonSpectrum {
  double e_cq = 0.0;  // Hz
  double e_cm = 0.0;  // Hz
  double e_j = 0.0;   // Hz
  double omega_q = 0.0;
  double omega_m = 0.0;
  double delta_q = 0.0;
  double delta_m = 0.0;
  double chi_qm = 0.0;
  double chi_mr = 0.0;
  double chi_qr = 0.0;
  double delta_mr = 0.0;
  double g_mr = 0.0;
  double omega_r = 0.0;
  bool transmon_regime = true;  // E_J / E_c >= 10 on both modes
};

DimonSpectrum dimon_spectrum(const DimonParams& params);

// Same algebra starting from charging and Josephson energies (Hz).
DimonSpectrum dimon_spectrum_from_energies(double e_cq, double e_cm, double e_j, double g_mr, double omega_r);

// Mediated shifts, all rad/s.
double mediated_chi_mr(double g_mr, double delta_mr, double e_cm_rad);
double mediated_chi_qr(double g_mr, double delta_mr, double chi_qm);

// g_mr that yields the requested chi_qr, from the mediated formula.
double invert_chi_qr(double chi_qr, double delta_mr, double chi_qm);

// chi_qr after moving the qubit frequency by `omega_q_shift` with chi_qm, g_mr and Delta_mr held.
double chi_qr_detuning_invariance(const DimonSpectrum& spectrum, double omega_q_shift);

// Standard transmon dispersive shift for comparison, rad/s.
double transmon_chi(double g, double delta_qr, double anharmonicity);

struct DispersiveCheck {
  double chi_qr = 0.0;  // rad/s
  double chi_mr = 0.0;
  std::array<int, 3> cutoffs{};
};

// Exact diagonalization of the RWA three-mode Hamiltonian. Throws
// NumericalError when raising every cutoff by 2 moves either shift by more
// than 1 % (absolute floor 1e-6 of the mediator anharmonicity).
DispersiveCheck numeric_dispersive_check(const DimonSpectrum& spectrum, std::array<int, 3> cutoffs);

//
// Linearized lumped networks
//

struct CircuitElement {
  char type = 'C';      // C [F], L [H], J [E_J/h in Hz], R [Ohm]
  int a = 0, b = 0;     // node indices, 0 is ground
  double value = 0.0;
  int asymmetry = 0;    // J only: E_J -> E_J (1 + asymmetry * lambda) in sweeps
};

struct Netlist {
  std::vector<std::string> nodes;  // non-ground node labels, node i+1
  std::vector<CircuitElement> elements;
  void validate() const;
};

struct LumpedCircuit {
  Eigen::MatrixXd capacitance;          // F
  Eigen::MatrixXd inverse_inductance;   // 1/H
  Eigen::MatrixXd conductance;          // S
  std::vector<std::string> labels;

  std::size_t size() const { return labels.size(); }
  int node(const std::string& label) const;  // 0-based index, throws if absent
};

// junction_scale multiplies every linearized junction inductance.
LumpedCircuit build_circuit(const Netlist& netlist, double lambda = 0.0, double junction_scale = 1.0);

inline double josephson_inductance(double ej_hz) {
  return physical::kReducedFluxQuantum * physical::kReducedFluxQuantum / (physical::kPlanck * ej_hz);
}

struct Eigenmode {
  double omega = 0.0;  // rad/s
  double gamma = 0.0;  // energy decay rate, 1/s
  double participation = 0.0;  // |phi|^2 weight on the focus nodes
  Eigen::VectorXcd flux;
};

// All oscillatory modes (above 1 MHz) of C phi'' + G phi' + Gamma phi = 0, ascending in frequency.
std::vector<Eigenmode> eigenmodes(const LumpedCircuit& circuit, std::span<const int> focus_nodes = {});

struct PurcellResult {
  double omega = 0.0;
  double t1 = 0.0;
  double gamma = 0.0;
};

// Mode nearest `target_frequency` (rad/s) with >= 1 % participation on the
// focus nodes (all nodes when empty); T1 = 1 / gamma.
PurcellResult purcell_t1(const LumpedCircuit& circuit, double target_frequency, std::span<const int> focus_nodes = {});

// Gamma = Omega^2 hbar omega_d / (4 P).
double rabi_to_purcell(double omega_drive, double rabi_rate, double power);

// T1 of mode b from T1 of mode a through the same port, given Rabi rates and
// the drive power ratio P_b / P_a.
double purcell_t1_from_reference(double t1_a, double omega_a, double rabi_a, double omega_b, double rabi_b,
                                 double power_ratio_b_over_a);

std::vector<double> thermal_populations(std::span<const double> levels_hz, double temperature);

struct EmissionParams {
  double gamma1 = 0.0;  // apparent radiative rate, 1/s
  double gamma2 = 0.0;  // 1/s
  double saturation = 0.0;
  double omega_m = 0.0;  // rad/s
};

std::complex<double> emission_s11(double omega_d, const EmissionParams& p);

struct EmissionPoint {
  double omega_d = 0.0;
  std::complex<double> s11;
};

// Fits (gamma1, gamma2, saturation, omega_m) to complex reflection data.
FitResult fit_emission(std::span<const EmissionPoint> data, const EmissionParams& guess);

// T1 = (1 - r_th) / (1 + r_th) / gamma1.
inline double emission_t1(double gamma1, double r_th) { return (1.0 - r_th) / (1.0 + r_th) / gamma1; }

}  // namespace rokit

#endif  // ROKIT_CIRCUIT_HPP
