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


#include "rokit/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace rokit {

namespace {

constexpr double kTwoPiLocal = 6.283185307179586476925286766559;

double charging_energy_hz(double capacitance) {
  return physical::kElementaryCharge * physical::kElementaryCharge / capacitance / physical::kPlanck;
}

// Hamiltonian units for the diagonalization: 2 pi GHz.
constexpr double kUnit = kTwoPiLocal * 1e9;

struct FockSpace {
  int nq, nm, nr;
  int index(int q, int m, int r) const { return (q * nm + m) * nr + r; }
  int size() const { return nq * nm * nr; }
};

DispersiveCheck diagonalize(const DimonSpectrum& s, std::array<int, 3> cut) {
  const FockSpace fs{cut[0], cut[1], cut[2]};
  const int dim = fs.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  const double wq = s.omega_q / kUnit, wm = s.omega_m / kUnit, wr = s.omega_r / kUnit;
  const double kq = kTwoPiLocal * s.e_cq / kUnit, km = kTwoPiLocal * s.e_cm / kUnit;
  const double chi = s.chi_qm / kUnit, g = s.g_mr / kUnit;
  for (int q = 0; q < fs.nq; ++q) {
    for (int m = 0; m < fs.nm; ++m) {
      for (int r = 0; r < fs.nr; ++r) {
        const int i = fs.index(q, m, r);
        h(i, i) = wq * q - 0.5 * kq * q * (q - 1) + wm * m - 0.5 * km * m * (m - 1) + chi * q * m + wr * r;
        // g (a_m^dag a_r + h.c.)
        if (m + 1 < fs.nm && r >= 1) {
          const int j = fs.index(q, m + 1, r - 1);
          const double v = g * std::sqrt(static_cast<double>(m + 1) * r);
          h(j, i) += v;
          h(i, j) += v;
        }
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success) throw NumericalError("numeric_dispersive_check: eigensolver failed");
  const Eigen::MatrixXd& vecs = solver.eigenvectors();
  const Eigen::VectorXd& vals = solver.eigenvalues();
  auto dressed = [&](int q, int m, int r) {
    Eigen::Index best = 0;
    vecs.row(fs.index(q, m, r)).cwiseAbs2().maxCoeff(&best);
    return vals(best);
  };
  DispersiveCheck out;
  out.cutoffs = cut;
  const double e000 = dressed(0, 0, 0), e001 = dressed(0, 0, 1);
  out.chi_qr = ((dressed(1, 0, 1) - dressed(1, 0, 0)) - (e001 - e000)) * kUnit;
  out.chi_mr = ((dressed(0, 1, 1) - dressed(0, 1, 0)) - (e001 - e000)) * kUnit;
  return out;
}

}  // namespace

void DimonParams::validate() const {
  if (!(ej1 > 0.0 && ej2 > 0.0)) throw ValidationError("dimon: Josephson energies must be positive");
  if (!(c_j1 > 0.0 && c_j2 > 0.0)) throw ValidationError("dimon: junction capacitances must be positive");
  if (!(c_s >= 0.0)) throw ValidationError("dimon: shunt capacitance must be non-negative");
  if (!std::isfinite(g_mr) || !std::isfinite(omega_r)) throw ValidationError("dimon: non-finite g_mr or omega_r");
  if (!std::isfinite(ng_q) || !std::isfinite(ng_m)) throw ValidationError("dimon: non-finite offset charge");
}

double mediated_chi_mr(double g_mr, double delta_mr, double e_cm_rad) {
  return -2.0 * g_mr * g_mr * e_cm_rad / (delta_mr * (delta_mr - e_cm_rad));
}

double mediated_chi_qr(double g_mr, double delta_mr, double chi_qm) {
  return g_mr * g_mr * chi_qm / (delta_mr * (delta_mr + chi_qm));
}

double invert_chi_qr(double chi_qr, double delta_mr, double chi_qm) {
  const double g2 = chi_qr * delta_mr * (delta_mr + chi_qm) / chi_qm;
  if (!(g2 >= 0.0)) throw ValidationError("invert_chi_qr: no real coupling reproduces this chi_qr");
  return std::sqrt(g2);
}

DimonSpectrum dimon_spectrum_from_energies(double e_cq, double e_cm, double e_j, double g_mr, double omega_r) {
  if (!(e_cq > 0.0 && e_cm > 0.0 && e_j > 0.0)) throw ValidationError("dimon: energies must be positive");
  DimonSpectrum s;
  s.e_cq = e_cq;
  s.e_cm = e_cm;
  s.e_j = e_j;
  const double cross = std::sqrt(e_cq * e_cm);
  s.omega_q = kTwoPiLocal * (4.0 * std::sqrt(e_cq * e_j) - e_cq - cross);
  s.omega_m = kTwoPiLocal * (4.0 * std::sqrt(e_cm * e_j) - e_cm - cross);
  s.delta_q = -kTwoPiLocal * e_cq;
  s.delta_m = -kTwoPiLocal * e_cm;
  s.chi_qm = -2.0 * kTwoPiLocal * cross;
  s.g_mr = g_mr;
  s.omega_r = omega_r;
  s.delta_mr = s.omega_m - omega_r;
  s.chi_mr = mediated_chi_mr(g_mr, s.delta_mr, kTwoPiLocal * e_cm);
  s.chi_qr = mediated_chi_qr(g_mr, s.delta_mr, s.chi_qm);
  s.transmon_regime = e_j / e_cq >= 10.0 && e_j / e_cm >= 10.0;
  return s;
}

DimonSpectrum dimon_spectrum(const DimonParams& params) {
  params.validate();
  const double e_j = 0.5 * (params.ej1 + params.ej2);
  const double c_j = 0.5 * (params.c_j1 + params.c_j2);
  return dimon_spectrum_from_energies(charging_energy_hz(4.0 * c_j), charging_energy_hz(4.0 * c_j + 8.0 * params.c_s),
                                      e_j, params.g_mr, params.omega_r);
}

double chi_qr_detuning_invariance(const DimonSpectrum& spectrum, double omega_q_shift) {
  DimonSpectrum shifted = spectrum;
  shifted.omega_q += omega_q_shift;
  return mediated_chi_qr(shifted.g_mr, shifted.delta_mr, shifted.chi_qm);
}

double transmon_chi(double g, double delta_qr, double anharmonicity) {
  return 2.0 * g * g * anharmonicity / (delta_qr * (delta_qr + anharmonicity));
}

DispersiveCheck numeric_dispersive_check(const DimonSpectrum& spectrum, std::array<int, 3> cutoffs) {
  if (cutoffs[0] < 4 || cutoffs[1] < 4 || cutoffs[2] < 4) {
    throw ValidationError("numeric_dispersive_check: cutoffs must be at least (4, 4, 4)");
  }
  const DispersiveCheck base = diagonalize(spectrum, cutoffs);
  const DispersiveCheck bigger = diagonalize(spectrum, {cutoffs[0] + 2, cutoffs[1] + 2, cutoffs[2] + 2});
  const double floor = 1e-6 * std::abs(spectrum.delta_m);
  auto moved = [&](double a, double b) { return std::abs(a - b) > 0.01 * std::abs(b) + floor; };
  if (moved(base.chi_qr, bigger.chi_qr) || moved(base.chi_mr, bigger.chi_mr)) {
    throw NumericalError("numeric_dispersive_check: not converged in the Fock cutoffs; raise them");
  }
  return base;
}

void Netlist::validate() const {
  const int n = static_cast<int>(nodes.size());
  if (n == 0) throw ValidationError("netlist: no nodes");
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const auto& e = elements[i];
    const std::string where = "netlist: element " + std::to_string(i);
    if (e.type != 'C' && e.type != 'L' && e.type != 'J' && e.type != 'R') {
      throw ValidationError(where + " has unknown type (expected C, L, J or R)");
    }
    if (e.a < 0 || e.b < 0 || e.a > n || e.b > n) throw ValidationError(where + " references an unknown node");
    if (e.a == e.b) throw ValidationError(where + " connects a node to itself");
    if (!(e.value > 0.0) || !std::isfinite(e.value)) throw ValidationError(where + " needs a positive value");
    if (e.asymmetry != 0 && e.type != 'J') throw ValidationError(where + ": asymmetry applies to junctions only");
  }
}

int LumpedCircuit::node(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return static_cast<int>(i);
  }
  throw ValidationError("circuit: no node named '" + label + "'");
}

LumpedCircuit build_circuit(const Netlist& netlist, double lambda, double junction_scale) {
  netlist.validate();
  if (!(std::abs(lambda) < 1.0)) throw ValidationError("build_circuit: asymmetry must lie in (-1, 1)");
  if (!(junction_scale > 0.0)) throw ValidationError("build_circuit: junction scale must be positive");
  const auto n = static_cast<Eigen::Index>(netlist.nodes.size());
  LumpedCircuit c;
  c.labels = netlist.nodes;
  c.capacitance = Eigen::MatrixXd::Zero(n, n);
  c.inverse_inductance = Eigen::MatrixXd::Zero(n, n);
  c.conductance = Eigen::MatrixXd::Zero(n, n);
  auto stamp = [](Eigen::MatrixXd& m, int a, int b, double y) {
    if (a > 0) m(a - 1, a - 1) += y;
    if (b > 0) m(b - 1, b - 1) += y;
    if (a > 0 && b > 0) {
      m(a - 1, b - 1) -= y;
      m(b - 1, a - 1) -= y;
    }
  };
  for (const auto& e : netlist.elements) {
    switch (e.type) {
      case 'C': stamp(c.capacitance, e.a, e.b, e.value); break;
      case 'L': stamp(c.inverse_inductance, e.a, e.b, 1.0 / e.value); break;
      case 'J': {
        const double ej = e.value * (1.0 + e.asymmetry * lambda);
        stamp(c.inverse_inductance, e.a, e.b, 1.0 / (josephson_inductance(ej) * junction_scale));
        break;
      }
      case 'R': stamp(c.conductance, e.a, e.b, 1.0 / e.value); break;
      default: break;
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(c.capacitance);
  if (llt.info() != Eigen::Success) {
    throw ValidationError("build_circuit: capacitance matrix is not positive definite (a node lacks a capacitive path to ground)");
  }
  return c;
}

std::vector<Eigenmode> eigenmodes(const LumpedCircuit& circuit, std::span<const int> focus_nodes) {
  const auto n = static_cast<Eigen::Index>(circuit.size());
  const double w0 = kTwoPiLocal * 1e9;
  Eigen::LLT<Eigen::MatrixXd> llt(circuit.capacitance);
  if (llt.info() != Eigen::Success) throw ValidationError("eigenmodes: capacitance matrix is not positive definite");

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  a.topRightCorner(n, n).setIdentity();
  a.bottomLeftCorner(n, n) = -llt.solve(circuit.inverse_inductance) / (w0 * w0);
  a.bottomRightCorner(n, n) = -llt.solve(circuit.conductance) / w0;

  Eigen::EigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success) throw NumericalError("eigenmodes: eigenvalue solver failed");

  std::vector<Eigenmode> modes;
  for (Eigen::Index k = 0; k < 2 * n; ++k) {
    const std::complex<double> s = solver.eigenvalues()(k);
    if (!(s.imag() > 1e-3)) continue;  // conjugate partner, static, overdamped or below 1 MHz
    Eigenmode mode;
    mode.flux = solver.eigenvectors().col(k).head(n);
    mode.omega = s.imag() * w0;
    // Re(s) = -b / 2a exactly for (s^2 C + s G + Gamma) phi = 0; the quotient keeps
    // tiny damping accurate where Re(s) itself is lost to rounding.
    const double cap = (mode.flux.adjoint() * circuit.capacitance * mode.flux)(0).real();
    const double loss = (mode.flux.adjoint() * circuit.conductance * mode.flux)(0).real();
    mode.gamma = std::max(0.0, loss / cap);
    const double total = mode.flux.squaredNorm();
    double on_focus = 0.0;
    if (focus_nodes.empty()) {
      on_focus = total;
    } else {
      for (int i : focus_nodes) {
        if (i < 0 || i >= n) throw ValidationError("eigenmodes: focus node out of range");
        on_focus += std::norm(mode.flux(i));
      }
    }
    mode.participation = total > 0.0 ? on_focus / total : 0.0;
    modes.push_back(std::move(mode));
  }
  std::sort(modes.begin(), modes.end(), [](const Eigenmode& x, const Eigenmode& y) { return x.omega < y.omega; });
  return modes;
}

PurcellResult purcell_t1(const LumpedCircuit& circuit, double target_frequency, std::span<const int> focus_nodes) {
  if (circuit.conductance.cwiseAbs().maxCoeff() == 0.0) {
    throw ValidationError("purcell_t1: the circuit has no dissipative element");
  }
  const auto modes = eigenmodes(circuit, focus_nodes);
  const Eigenmode* best = nullptr;
  for (const auto& m : modes) {
    if (m.participation < 0.01) continue;
    if (!best || std::abs(m.omega - target_frequency) < std::abs(best->omega - target_frequency)) best = &m;
  }
  if (!best) throw NumericalError("purcell_t1: no underdamped mode with weight on the focus nodes");
  PurcellResult out;
  out.omega = best->omega;
  out.gamma = best->gamma;
  out.t1 = best->gamma > 0.0 ? 1.0 / best->gamma : std::numeric_limits<double>::infinity();
  return out;
}

double rabi_to_purcell(double omega_drive, double rabi_rate, double power) {
  if (!(power > 0.0)) throw ValidationError("rabi_to_purcell: power must be positive");
  return rabi_rate * rabi_rate * physical::kHbar * omega_drive / (4.0 * power);
}

double purcell_t1_from_reference(double t1_a, double omega_a, double rabi_a, double omega_b, double rabi_b,
                                 double power_ratio_b_over_a) {
  const double gamma_a = 1.0 / t1_a;
  // Gamma_b / Gamma_a = (Omega_b^2 omega_b / P_b) / (Omega_a^2 omega_a / P_a).
  const double ratio = (rabi_b * rabi_b * omega_b) / (rabi_a * rabi_a * omega_a) / power_ratio_b_over_a;
  return 1.0 / (gamma_a * ratio);
}

std::vector<double> thermal_populations(std::span<const double> levels_hz, double temperature) {
  if (levels_hz.size() < 2) throw ValidationError("thermal_populations: need at least 2 levels");
  if (!(temperature > 0.0)) throw ValidationError("thermal_populations: temperature must be positive");
  const double lowest = *std::min_element(levels_hz.begin(), levels_hz.end());
  const double scale = physical::kPlanck / (physical::kBoltzmann * temperature);
  std::vector<double> p(levels_hz.size());
  double z = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(-(levels_hz[i] - lowest) * scale);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

std::complex<double> emission_s11(double omega_d, const EmissionParams& p) {
  if (!(p.gamma2 > 0.0)) throw ValidationError("emission_s11: gamma2 must be positive");
  const double x = (p.omega_m - omega_d) / p.gamma2;
  return 1.0 - (p.gamma1 / p.gamma2) * std::complex<double>(1.0, -x) / (1.0 + p.saturation + x * x);
}

FitResult fit_emission(std::span<const EmissionPoint> data, const EmissionParams& guess) {
  if (data.size() < 2) throw ValidationError("fit_emission: need at least 2 points");
  std::vector<double> obs;
  obs.reserve(2 * data.size());
  for (const auto& d : data) {
    obs.push_back(d.s11.real());
    obs.push_back(d.s11.imag());
  }
  // The centre is fitted as an offset from the guess so that steps scale with the linewidth.
  VectorModel model = [&](std::span<const double> p, std::span<double> out) {
    const EmissionParams e{p[0], std::abs(p[1]), p[2], guess.omega_m + p[3]};
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto s = emission_s11(data[i].omega_d, e);
      out[2 * i] = s.real();
      out[2 * i + 1] = s.imag();
    }
  };
  LsqOptions opt;
  opt.typical = {std::abs(guess.gamma1), std::abs(guess.gamma2), 1.0, std::abs(guess.gamma2)};
  FitResult fit = least_squares(model, obs, {}, {guess.gamma1, guess.gamma2, guess.saturation, 0.0}, opt);
  fit.parameters[1] = std::abs(fit.parameters[1]);
  fit.parameters[3] += guess.omega_m;
  return fit;
}

}  // namespace rokit
