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


#include "rokit/session.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <variant>

#include <fmt/format.h>

#include "rokit/channel.hpp"
#include "rokit/circuit.hpp"
#include "rokit/io.hpp"
#include "rokit/pulse.hpp"
#include "rokit/resonator.hpp"
#include "rokit/rilb.hpp"

namespace rokit::cli {

namespace {

using io::json;
namespace fs = std::filesystem;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Reads one JSON object, records problems instead of throwing and reports
// every key it was never asked about when it goes out of scope.
class Scope {
 public:
  Scope(const json* node, std::string path, std::vector<Diagnostic>* diags)
      : node_(node), path_(std::move(path)), diags_(diags) {
    if (node_ != nullptr && !node_->is_object()) {
      fail(path_, "expected an object");
      node_ = nullptr;
    }
  }
  Scope(const Scope&) = delete;
  Scope& operator=(const Scope&) = delete;
  ~Scope() {
    if (node_ == nullptr) return;
    for (const auto& [k, v] : node_->items()) {
      if (!seen_.count(k)) fail(at(k), "unknown key");
    }
  }

  bool valid() const { return node_ != nullptr; }
  const std::string& path() const { return path_; }
  std::string at(const std::string& key) const { return path_ + "." + key; }
  void fail(const std::string& where, const std::string& message) const { diags_->push_back({where, message}); }
  std::vector<Diagnostic>* diagnostics() const { return diags_; }

  bool has(const std::string& key) const { return node_ != nullptr && node_->contains(key); }

  const json* raw(const std::string& key, bool required = true) {
    seen_.insert(key);
    if (node_ == nullptr) return nullptr;
    const auto it = node_->find(key);
    if (it == node_->end()) {
      if (required) fail(at(key), "missing");
      return nullptr;
    }
    return &*it;
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const json* v = raw(key, !fallback);
    if (v == nullptr) return fallback.value_or(0.0);
    if (!v->is_number()) {
      fail(at(key), "expected a number");
      return fallback.value_or(0.0);
    }
    const double x = v->get<double>();
    if (!std::isfinite(x)) fail(at(key), "must be finite");
    return x;
  }

  double positive(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const double x = number(key, fallback);
    if (has(key) && !(x > 0.0)) fail(at(key), "must be positive");
    return x;
  }

  double probability(const std::string& key, double fallback = 0.0) {
    const double x = number(key, fallback);
    if (has(key) && !(x >= 0.0 && x <= 1.0)) fail(at(key), "must lie in [0, 1]");
    return x;
  }

  long long integer(const std::string& key, std::optional<long long> fallback, long long min_value) {
    const json* v = raw(key, !fallback);
    if (v == nullptr) return fallback.value_or(min_value);
    if (!v->is_number_integer()) {
      fail(at(key), "expected an integer");
      return fallback.value_or(min_value);
    }
    const long long x = v->get<long long>();
    if (x < min_value) {
      fail(at(key), "must be at least " + std::to_string(min_value));
      return min_value;
    }
    return x;
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = raw(key, false);
    if (v == nullptr) return fallback;
    if (!v->is_boolean()) {
      fail(at(key), "expected true or false");
      return fallback;
    }
    return v->get<bool>();
  }

  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    const json* v = raw(key, !fallback);
    if (v == nullptr) return fallback.value_or("");
    if (!v->is_string()) {
      fail(at(key), "expected a string");
      return fallback.value_or("");
    }
    return v->get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::size_t min_size, bool required = true) {
    std::vector<double> out;
    const json* v = raw(key, required);
    if (v == nullptr) return out;
    if (!v->is_array()) {
      fail(at(key), "expected an array of numbers");
      return out;
    }
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number() || !std::isfinite((*v)[i].get<double>())) {
        fail(at(key) + "[" + std::to_string(i) + "]", "expected a finite number");
        continue;
      }
      out.push_back((*v)[i].get<double>());
    }
    if (out.size() < min_size) fail(at(key), "needs at least " + std::to_string(min_size) + " entries");
    return out;
  }

  std::complex<double> complex(const std::string& key, std::optional<std::complex<double>> fallback = std::nullopt) {
    const json* v = raw(key, !fallback);
    if (v == nullptr) return fallback.value_or(0.0);
    if (v->is_number()) return {v->get<double>(), 0.0};
    if (v->is_array() && v->size() == 2 && (*v)[0].is_number() && (*v)[1].is_number()) {
      return {(*v)[0].get<double>(), (*v)[1].get<double>()};
    }
    fail(at(key), "expected a number or a [re, im] pair");
    return fallback.value_or(0.0);
  }

 private:
  const json* node_;
  std::string path_;
  std::vector<Diagnostic>* diags_;
  std::set<std::string> seen_;
};

// Readers in io prefix their messages with the JSON path of the offending
// value. Use that path for the diagnostic when present, `where` otherwise.
void fail_at(const Scope& scope, const std::string& where, const std::exception& e) {
  const std::string text = e.what();
  const auto colon = text.find(": ");
  if (!text.empty() && text.front() == '$' && colon != std::string::npos && text.find(' ') > colon) {
    scope.fail(text.substr(0, colon), text.substr(colon + 2));
  } else {
    scope.fail(where, text);
  }
}

// Runs a module's own invariant check and turns its exception into a diagnostic.
template <typename F>
void check(const Scope& scope, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    scope.fail(scope.path(), e.what());
  }
}

struct Context {
  fs::path base_dir;
  fs::path output_dir;
  std::uint64_t seed = 0;
  int threads = 1;
  std::vector<std::string> outputs;

  fs::path resolve(const std::string& p) const {
    const fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  }
  void write(const std::string& name, const std::string& text) {
    io::write_text(output_dir / name, text);
    outputs.push_back(name);
  }
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

//
// Shared blocks
//

ResonatorParams parse_resonator(Scope& s) {
  const double kappa_r = s.positive("kappa_r_hz");
  const double kappa_ext = s.number("kappa_ext_hz");
  const double kerr = s.number("kerr_hz", 0.0);
  const double chi = s.number("chi_qr_hz");
  const auto k_sca = s.complex("k_sca_mhz", std::complex<double>{1.0, 0.0});
  double kappa_int = 0.0;
  if (s.has("kappa_int_hz")) {
    kappa_int = s.number("kappa_int_hz");
  } else {
    s.raw("kappa_int_hz", false);
    if (kappa_ext > kappa_r) {
      s.fail(s.at("kappa_ext_hz"), "exceeds kappa_r_hz; the invariant kappa_r = kappa_ext + kappa_int needs kappa_ext <= kappa_r");
      return {};
    }
    kappa_int = kappa_r - kappa_ext;
  }
  ResonatorParams p = ResonatorParams::from_hz(kappa_r, kappa_ext, kappa_int, kerr, chi, k_sca);
  if (s.valid()) check(s, [&] { p.validate(); });
  return p;
}

std::optional<ShapedPulse> parse_pulse(Scope& root, Context& ctx, const std::string& inline_key,
                                       const std::string& file_key) {
  const bool has_inline = root.has(inline_key), has_file = root.has(file_key);
  if (has_inline == has_file) {
    root.fail(root.path(), "give exactly one of '" + inline_key + "' and '" + file_key + "'");
    root.raw(inline_key, false);
    root.raw(file_key, false);
    return std::nullopt;
  }
  try {
    if (has_inline) return io::pulse_from_json(*root.raw(inline_key), root.at(inline_key));
    const std::string file = root.string(file_key);
    return io::pulse_from_json(json::parse(io::read_text(ctx.resolve(file))), file);
  } catch (const json::exception& e) {
    root.fail(root.at(file_key), std::string("malformed JSON: ") + e.what());
  } catch (const std::exception& e) {
    fail_at(root, has_inline ? root.at(inline_key) : root.at(file_key), e);
  }
  return std::nullopt;
}

std::optional<Netlist> parse_netlist(Scope& root, Context& ctx, const std::string& inline_key,
                                     const std::string& file_key) {
  const bool has_inline = root.has(inline_key), has_file = root.has(file_key);
  if (has_inline == has_file) {
    root.fail(root.path(), "give exactly one of '" + inline_key + "' and '" + file_key + "'");
    root.raw(inline_key, false);
    root.raw(file_key, false);
    return std::nullopt;
  }
  try {
    if (has_inline) return io::netlist_from_json(*root.raw(inline_key), root.at(inline_key));
    const std::string file = root.string(file_key);
    return io::netlist_from_json(json::parse(io::read_text(ctx.resolve(file))), file);
  } catch (const json::exception& e) {
    root.fail(root.at(file_key), std::string("malformed JSON: ") + e.what());
  } catch (const std::exception& e) {
    fail_at(root, has_inline ? root.at(inline_key) : root.at(file_key), e);
  }
  return std::nullopt;
}

std::vector<int> parse_focus(Scope& s, const std::string& key, const std::optional<Netlist>& netlist) {
  std::vector<int> out;
  const json* v = s.raw(key, false);
  if (v == nullptr) return out;
  if (!v->is_array()) {
    s.fail(s.at(key), "expected an array of node labels");
    return out;
  }
  for (std::size_t i = 0; i < v->size(); ++i) {
    const std::string where = s.at(key) + "[" + std::to_string(i) + "]";
    const json& n = (*v)[i];
    if (!n.is_string()) {
      s.fail(where, "expected a node label");
      continue;
    }
    if (!netlist) continue;
    const auto& labels = netlist->nodes;
    const auto it = std::find(labels.begin(), labels.end(), n.get<std::string>());
    if (it == labels.end()) {
      s.fail(where, "no node named '" + n.get<std::string>() + "'");
      continue;
    }
    out.push_back(static_cast<int>(it - labels.begin()));
  }
  return out;
}

//
// Subcommands
//

// Each subcommand parses into a plan (collecting diagnostics) and executes it.
using Action = std::function<json(Context&)>;
using Parser = std::function<Action(Scope&, Context&)>;

Action parse_steady_state(Scope& root, Context&) {
  Scope rs(root.raw("resonator"), root.at("resonator"), root.diagnostics());
  const ResonatorParams params = parse_resonator(rs);
  Scope drive(root.raw("drive"), root.at("drive"), root.diagnostics());
  std::vector<double> detunings;
  if (drive.has("detunings_hz")) {
    detunings = drive.numbers("detunings_hz", 1);
    drive.raw("detuning_hz", false);
    if (drive.has("detuning_hz")) drive.fail(drive.path(), "give detuning_hz or detunings_hz, not both");
  } else {
    detunings = {drive.number("detuning_hz")};
  }
  std::complex<double> amplitude_hz;
  if (drive.has("a_dac")) {
    amplitude_hz = 1e6 * params.k_sca * drive.number("a_dac");
    drive.raw("amplitude_hz", false);
    if (drive.has("amplitude_hz")) drive.fail(drive.path(), "give amplitude_hz or a_dac, not both");
  } else {
    amplitude_hz = drive.complex("amplitude_hz");
  }
  return [=](Context& ctx) {
    std::string csv = "detuning_hz,root,photons,re_alpha,im_alpha\n";
    json first = json::array();
    for (std::size_t i = 0; i < detunings.size(); ++i) {
      const auto roots = steady_state(params, hz_to_rad(detunings[i]), kTwoPi * amplitude_hz);
      for (std::size_t r = 0; r < roots.size(); ++r) {
        csv += fmt::format("{},{},{},{},{}\n", io::num(detunings[i]), r, io::num(roots[r].photons),
                           io::num(roots[r].alpha.real()), io::num(roots[r].alpha.imag()));
        if (i == 0) first.push_back(roots[r].photons);
      }
    }
    ctx.write("steady_state.csv", csv);
    return json{{"photons", first}, {"bistable", first.size() > 1}};
  };
}

Action parse_trajectory(Scope& root, Context& ctx) {
  Scope rs(root.raw("resonator"), root.at("resonator"), root.diagnostics());
  const ResonatorParams params = parse_resonator(rs);
  const auto pulse = parse_pulse(root, ctx, "pulse", "pulse_file");
  const double tail_ns = root.has("tail_ns") ? root.number("tail_ns") : (rs.valid() && params.kappa_r > 0.0
                                                                           ? ring_down_window(params) * 1e9
                                                                           : 0.0);
  if (root.has("tail_ns") && tail_ns < 0.0) root.fail(root.at("tail_ns"), "must be non-negative");
  const double dt_ns = root.number("dt_ns", 0.0);
  if (dt_ns < 0.0) root.fail(root.at("dt_ns"), "must be non-negative");
  return [=](Context& c) {
    SimulationOptions opt;
    opt.dt = dt_ns * 1e-9;
    const Trajectory traj = simulate_trajectories(params, *pulse, tail_ns * 1e-9, opt);
    c.write("trajectory.csv", io::trajectory_csv(traj));
    double peak = 0.0;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
      peak = std::max({peak, std::norm(traj.alpha_g[i]), std::norm(traj.alpha_e[i])});
    }
    return json{{"samples", traj.times.size()}, {"peak_n", peak}, {"duration_ns", pulse->duration() * 1e9}};
  };
}

Action parse_calibrate_photon(Scope& root, Context&) {
  Scope guess(root.raw("guess"), root.at("guess"), root.diagnostics());
  const double kerr_guess = guess.number("kerr_hz");
  const double kappa_guess = guess.positive("kappa_r_hz");
  const double k_sca_guess = guess.positive("k_sca_mhz");

  std::vector<CalibrationPoint> points;
  struct Synthetic {
    double kerr_hz, kappa_r_hz, k_sca_mhz, noise;
    std::vector<double> detunings_hz, a_dac;
  };
  std::optional<Synthetic> synth;
  if (root.has("data") == root.has("synthetic")) {
    root.fail(root.path(), "give exactly one of 'data' and 'synthetic'");
    root.raw("data", false);
    root.raw("synthetic", false);
  } else if (root.has("data")) {
    const json* data = root.raw("data");
    if (!data->is_array()) root.fail(root.at("data"), "expected an array of points");
    for (std::size_t i = 0; data->is_array() && i < data->size(); ++i) {
      Scope pt(&(*data)[i], root.at("data") + "[" + std::to_string(i) + "]", root.diagnostics());
      CalibrationPoint p;
      p.detuning = hz_to_rad(pt.number("detuning_hz"));
      p.a_dac = pt.number("a_dac");
      p.photons = pt.number("photons");
      points.push_back(p);
    }
  } else {
    Scope s(root.raw("synthetic"), root.at("synthetic"), root.diagnostics());
    Synthetic v;
    v.kerr_hz = s.number("kerr_hz");
    v.kappa_r_hz = s.positive("kappa_r_hz");
    v.k_sca_mhz = s.positive("k_sca_mhz");
    v.detunings_hz = s.numbers("detunings_hz", 3);
    v.a_dac = s.numbers("a_dac", 2);
    v.noise = s.number("noise_relative", 0.0);
    if (v.noise < 0.0) s.fail(s.at("noise_relative"), "must be non-negative");
    synth = v;
  }
  {
    std::set<double> detunings, amplitudes;
    for (const auto& p : points) {
      detunings.insert(p.detuning);
      amplitudes.insert(p.a_dac);
    }
    if (synth) {
      detunings.insert(synth->detunings_hz.begin(), synth->detunings_hz.end());
      amplitudes.insert(synth->a_dac.begin(), synth->a_dac.end());
    }
    if (detunings.size() < 3 || amplitudes.size() < 2) {
      root.fail(root.path(), "calibration needs >= 3 distinct detunings and >= 2 distinct amplitudes");
    }
  }
  return [=](Context& ctx) mutable {
    if (synth) {
      RandomStream noise(ctx.seed, stream_domain::kNoise);
      for (double d : synth->detunings_hz) {
        for (double a : synth->a_dac) {
          CalibrationPoint p{hz_to_rad(d), a, 0.0};
          p.photons = predicted_photons(hz_to_rad(synth->kerr_hz), hz_to_rad(synth->kappa_r_hz), synth->k_sca_mhz, p);
          if (synth->noise > 0.0) p.photons *= 1.0 + synth->noise * noise.normal();
          points.push_back(p);
        }
      }
    }
    const auto cal = calibrate_photon_number(points, hz_to_rad(kerr_guess), hz_to_rad(kappa_guess), k_sca_guess);
    std::string csv = "detuning_hz,a_dac,photons,photons_fit\n";
    for (const auto& p : points) {
      csv += fmt::format("{},{},{},{}\n", io::num(rad_to_hz(p.detuning)), io::num(p.a_dac), io::num(p.photons),
                         io::num(predicted_photons(cal.kerr(), cal.kappa_r(), cal.k_sca(), p)));
    }
    const json report = {{"kerr_hz", rad_to_hz(cal.kerr())},
                         {"kerr_hz_stderr", rad_to_hz(cal.fit.stderr_of(0))},
                         {"kappa_r_hz", rad_to_hz(cal.kappa_r())},
                         {"kappa_r_hz_stderr", rad_to_hz(cal.fit.stderr_of(1))},
                         {"k_sca_mhz", cal.k_sca()},
                         {"k_sca_mhz_stderr", cal.fit.stderr_of(2)},
                         {"kerr_consistent_with_zero", cal.kerr_consistent_with_zero},
                         {"converged", cal.fit.converged},
                         {"residual_norm", cal.fit.residual_norm}};
    ctx.write("calibration.json", dump(report));
    ctx.write("calibration_data.csv", csv);
    return json{{"kerr_hz", report["kerr_hz"]}, {"kappa_r_hz", report["kappa_r_hz"]}, {"k_sca_mhz", cal.k_sca()}};
  };
}

Action parse_optimize_pulse(Scope& root, Context&) {
  Scope rs(root.raw("resonator"), root.at("resonator"), root.diagnostics());
  const ResonatorParams params = parse_resonator(rs);
  Scope cs(root.raw("constraint"), root.at("constraint"), root.diagnostics());
  PulseConstraint constraint;
  constraint.n_max = cs.positive("n_max");
  constraint.tau_ro = cs.positive("tau_ro_ns") * 1e-9;
  constraint.segment_count = static_cast<int>(cs.integer("segment_count", 4, 1));
  if (cs.valid()) check(cs, [&] { constraint.validate(); });
  PulseSearchOptions options;
  {
    Scope ss(root.raw("search", false), root.at("search"), root.diagnostics());
    options.restarts = static_cast<int>(ss.integer("restarts", options.restarts, 1));
    options.max_evaluations = static_cast<int>(ss.integer("max_evaluations", options.max_evaluations, 10));
    options.min_segment = ss.positive("min_segment_ns", options.min_segment * 1e9) * 1e-9;
    options.residual_cap = ss.positive("residual_cap", options.residual_cap);
  }
  return [=](Context& ctx) mutable {
    options.threads = ctx.threads;
    const OptimizedPulse best = optimize_pulse(params, constraint, RandomStream(ctx.seed, 0), options);
    const BoxcarSearch box = best_boxcar(params, constraint);
    ctx.write("pulse.json", io::pulse_text(best.pulse));
    ctx.write("boxcar.json", io::pulse_text(box.pulse));
    SimulationOptions sim;
    const Trajectory traj = simulate_trajectories(params, best.pulse, ring_down_window(params), sim);
    ctx.write("trajectory.csv", io::trajectory_csv(traj));
    auto objective = [](const PulseObjective& o) {
      return json{{"theta", o.theta}, {"peak_n", o.peak_n}, {"residual_n", o.residual_n}};
    };
    const json report = {{"optimized", objective(best.objective)},
                         {"boxcar", objective(box.objective)},
                         {"best_restart", best.best_restart},
                         {"restart_values", best.restart_values},
                         {"penalty_weight", best.penalty_weight}};
    ctx.write("optimization.json", dump(report));
    return json{{"theta", best.objective.theta},
                {"theta_boxcar", box.objective.theta},
                {"peak_n", best.objective.peak_n},
                {"residual_n", best.objective.residual_n}};
  };
}

std::optional<ReadoutChannel> parse_channel_physics(Scope& s) {
  const double snr = s.has("snr") && s.raw("snr", false)->is_string() && s.raw("snr")->get<std::string>() == "inf"
                         ? std::numeric_limits<double>::infinity()
                         : s.number("snr", 0.0);
  TransitionRates rates;
  {
    Scope r(s.raw("rates"), s.at("rates"), s.diagnostics());
    rates.g_to_e = r.probability("g_to_e");
    rates.g_to_leak = r.probability("g_to_leak");
    rates.e_to_g = r.probability("e_to_g");
    rates.e_to_leak = r.probability("e_to_leak");
    rates.window_fraction = r.probability("window_fraction", 1.0);
    if (r.valid()) check(r, [&] { rates.validate(); });
  }
  Scope iq(s.raw("iq"), s.at("iq"), s.diagnostics());
  const auto g = iq.complex("center_g");
  const auto e = iq.complex("center_e");
  const double sigma = iq.positive("sigma", 1.0);
  std::vector<std::complex<double>> leaks;
  if (const json* l = iq.raw("leak_centers", false)) {
    if (!l->is_array()) iq.fail(iq.at("leak_centers"), "expected an array of [re, im] pairs");
    for (std::size_t i = 0; l->is_array() && i < l->size(); ++i) {
      const json& c = (*l)[i];
      if (c.is_array() && c.size() == 2 && c[0].is_number() && c[1].is_number()) {
        leaks.emplace_back(c[0].get<double>(), c[1].get<double>());
      } else {
        iq.fail(iq.at("leak_centers") + "[" + std::to_string(i) + "]", "expected a [re, im] pair");
      }
    }
  }
  const std::string threshold = iq.string("threshold", "midpoint");
  if (threshold != "midpoint" && threshold != "optimal") iq.fail(iq.at("threshold"), "expected 'midpoint' or 'optimal'");
  if (s.diagnostics()->size() > 0) return std::nullopt;
  std::optional<ReadoutChannel> out;
  check(s, [&] {
    IQModel model = IQModel::midpoint(g, e, sigma, leaks);
    model.validate();
    if (threshold == "optimal") model.threshold = optimal_threshold(model);
    out = channel_from_physics(snr, rates, model);
  });
  return out;
}

Action parse_channel_metrics(Scope& root, Context&) {
  std::vector<std::pair<std::string, ReadoutChannel>> channels;
  const json* list = root.raw("channels");
  if (list != nullptr && (!list->is_array() || list->empty())) root.fail(root.at("channels"), "expected a non-empty array");
  std::set<std::string> names;
  for (std::size_t i = 0; list != nullptr && list->is_array() && i < list->size(); ++i) {
    Scope cs(&(*list)[i], root.at("channels") + "[" + std::to_string(i) + "]", root.diagnostics());
    const std::string name = cs.string("name");
    if (!names.insert(name).second) cs.fail(cs.at("name"), "duplicate channel name");
    if (name.find_first_of(",\n\"") != std::string::npos) cs.fail(cs.at("name"), "must not contain commas or quotes");
    if (cs.has("table") == cs.has("physics")) {
      cs.fail(cs.path(), "give exactly one of 'table' and 'physics'");
      cs.raw("table", false);
      cs.raw("physics", false);
      continue;
    }
    if (cs.has("table")) {
      try {
        channels.emplace_back(name, io::channel_from_json(*cs.raw("table"), cs.at("table")));
      } catch (const std::exception& e) {
        fail_at(cs, cs.at("table"), e);
      }
    } else {
      const std::size_t before = root.diagnostics()->size();
      Scope ps(cs.raw("physics"), cs.at("physics"), root.diagnostics());
      const auto ch = parse_channel_physics(ps);
      if (ch && root.diagnostics()->size() == before) channels.emplace_back(name, *ch);
    }
  }
  return [=](Context& ctx) {
    std::string csv = io::metrics_csv_header();
    json tables = json::object();
    json summary = json::object();
    for (const auto& [name, ch] : channels) {
      const ChannelMetrics m = metrics_from_channel(ch);
      csv += io::metrics_csv_row(name, m);
      json t = io::channel_to_json(ch);
      t["two_readout"] = {{"given_g", two_readout_enumerate(ch, Qubit::g)},
                          {"given_e", two_readout_enumerate(ch, Qubit::e)}};
      tables[name] = t;
      summary[name] = {{"F", m.mean.fidelity}, {"R", m.mean.repeatability}, {"L", m.mean.leakage}};
    }
    ctx.write("metrics.csv", csv);
    ctx.write("channels.json", dump(tables));
    return json{{"channels", summary}};
  };
}

// Optional "fit" block shared by simulate-rilb and fit-rilb.
LeakageFitOptions parse_fit_options(Scope& root) {
  LeakageFitOptions options;
  Scope fs(root.raw("fit", false), root.at("fit"), root.diagnostics());
  options.bootstrap = static_cast<int>(fs.integer("bootstrap", options.bootstrap, 0));
  options.significance = fs.number("significance", options.significance);
  if (!(options.significance > 0.0 && options.significance < 1.0)) {
    fs.fail(fs.at("significance"), "must lie in (0, 1)");
  }
  return options;
}

json fit_summary(const LeakageFit& fit) {
  return json{{"L", fit.rate()},        {"L_stderr", fit.rate_stderr()}, {"L_ci95", fit.rate_interval},
              {"resolved", fit.resolved}, {"converged", fit.fit.converged}, {"clamped", fit.clamped}};
}

Action parse_simulate_rilb(Scope& root, Context&) {
  RILBConfig config;
  {
    Scope rs(root.raw("rilb"), root.at("rilb"), root.diagnostics());
    config.m_cycles = static_cast<int>(rs.integer("m_cycles", config.m_cycles, 1));
    config.k_randomizations = static_cast<int>(rs.integer("k_randomizations", config.k_randomizations, 1));
    config.n_shots = static_cast<int>(rs.integer("n_shots", config.n_shots, 1));
    config.pi_error = rs.probability("pi_error");
    config.p_ini = rs.probability("p_ini");
    if (rs.valid()) check(rs, [&] { config.validate(); });
  }
  std::optional<ReadoutModel> model;
  if (root.has("model") == root.has("channel")) {
    root.fail(root.path(), "give exactly one of 'model' and 'channel'");
    root.raw("model", false);
    root.raw("channel", false);
  } else if (root.has("model")) {
    Scope ms(root.raw("model"), root.at("model"), root.diagnostics());
    CycleModel m;
    m.leakage.l_up = ms.probability("l_up");
    m.leakage.l_down = ms.probability("l_down");
    m.leakage.p0_given_l = ms.probability("p0_given_l");
    m.heat = ms.probability("heat");
    m.decay = ms.probability("decay");
    m.assign_error_g = ms.probability("assign_error_g");
    m.assign_error_e = ms.probability("assign_error_e");
    if (ms.valid()) check(ms, [&] { m.validate(); });
    model = m;
  } else {
    try {
      model = io::channel_from_json(*root.raw("channel"), root.at("channel"));
    } catch (const std::exception& e) {
      fail_at(root, root.at("channel"), e);
    }
  }
  const bool special = root.boolean("special_sequences", false);
  if (special && config.k_randomizations < 3) {
    root.fail(root.at("special_sequences"), "needs k_randomizations >= 3");
  }
  const bool write_raw = root.boolean("write_raw", false);
  LeakageFitOptions fit_options = parse_fit_options(root);
  return [=](Context& ctx) mutable {
    config.seed = ctx.seed;
    const Sequences sequences = generate_sequences(config, special ? special_sequences(config.m_cycles) : Sequences{});
    const RILBRun run = simulate_run(config, *model, sequences, ctx.threads);
    const RILBResult result = aggregate(run, ctx.threads);
    fit_options.seed = ctx.seed;
    const LeakageFit fit = fit_leakage(result, fit_options);
    ctx.write("aggregate.csv", io::aggregate_csv(result));
    ctx.write("fit.json", dump(io::leakage_fit_json(fit)));
    std::string leaked = "m,leaked_fraction\n";
    const double total = static_cast<double>(config.k_randomizations) * config.n_shots;
    for (std::size_t m = 0; m < run.leaked_counts.size(); ++m) {
      leaked += fmt::format("{},{}\n", m, io::num(static_cast<double>(run.leaked_counts[m]) / total));
    }
    ctx.write("leaked_population.csv", leaked);
    if (write_raw) {
      io::write_rilb_raw(ctx.output_dir / "raw.bin", run);
      ctx.outputs.push_back("raw.bin");
    }
    return fit_summary(fit);
  };
}

Action parse_fit_rilb(Scope& root, Context& ctx) {
  const std::string file = root.string("aggregate_csv");
  std::optional<RILBResult> result;
  if (!file.empty()) {
    try {
      result = io::aggregate_from_csv(io::read_text(ctx.resolve(file)));
      if (result->mean_correlation.size() < 3) throw ValidationError("needs at least 3 rows");
    } catch (const std::exception& e) {
      root.fail(root.at("aggregate_csv"), e.what());
    }
  }
  LeakageFitOptions fit_options = parse_fit_options(root);
  return [=](Context& c) mutable {
    fit_options.seed = c.seed;
    const LeakageFit fit = fit_leakage(*result, fit_options);
    c.write("fit.json", dump(io::leakage_fit_json(fit)));
    return fit_summary(fit);
  };
}

json spectrum_json(const DimonSpectrum& s) {
  return {{"e_cq_hz", s.e_cq},
          {"e_cm_hz", s.e_cm},
          {"e_j_hz", s.e_j},
          {"omega_q_hz", rad_to_hz(s.omega_q)},
          {"omega_m_hz", rad_to_hz(s.omega_m)},
          {"delta_q_hz", rad_to_hz(s.delta_q)},
          {"delta_m_hz", rad_to_hz(s.delta_m)},
          {"chi_qm_hz", rad_to_hz(s.chi_qm)},
          {"chi_mr_hz", rad_to_hz(s.chi_mr)},
          {"chi_qr_hz", rad_to_hz(s.chi_qr)},
          {"g_mr_hz", rad_to_hz(s.g_mr)},
          {"omega_r_hz", rad_to_hz(s.omega_r)},
          {"delta_mr_hz", rad_to_hz(s.delta_mr)},
          {"transmon_regime", s.transmon_regime}};
}

// Builds a spectrum from either a physical 'dimon' block or an 'energies' block.
std::optional<std::function<DimonSpectrum(double g_mr, double ej_scale)>> parse_dimon_source(Scope& root, bool required,
                                                                            std::optional<double>* g_mr_hz) {
  const bool has_dimon = root.has("dimon"), has_energies = root.has("energies");
  if (!has_dimon && !has_energies && !required) return std::nullopt;
  if (has_dimon == has_energies) {
    root.fail(root.path(), "give exactly one of 'dimon' and 'energies'");
    root.raw("dimon", false);
    root.raw("energies", false);
    return std::nullopt;
  }
  if (has_dimon) {
    Scope d(root.raw("dimon"), root.at("dimon"), root.diagnostics());
    DimonParams p;
    p.ej1 = d.positive("ej1_hz");
    p.ej2 = d.positive("ej2_hz");
    p.c_j1 = d.positive("c_j1_ff") * 1e-15;
    p.c_j2 = d.positive("c_j2_ff") * 1e-15;
    p.c_s = d.number("c_s_ff", 0.0) * 1e-15;
    p.omega_r = hz_to_rad(d.positive("omega_r_hz"));
    if (d.has("g_mr_hz")) *g_mr_hz = d.number("g_mr_hz");
    else d.raw("g_mr_hz", false);
    if (d.valid()) check(d, [&] { p.validate(); });
    return [p](double g_mr, double ej_scale) {
      DimonParams q = p;
      q.g_mr = g_mr;
      q.ej1 *= ej_scale;
      q.ej2 *= ej_scale;
      return dimon_spectrum(q);
    };
  }
  Scope en(root.raw("energies"), root.at("energies"), root.diagnostics());
  const double e_cq = en.positive("e_cq_hz"), e_cm = en.positive("e_cm_hz"), e_j = en.positive("e_j_hz");
  const double omega_r = hz_to_rad(en.positive("omega_r_hz"));
  if (en.has("g_mr_hz")) *g_mr_hz = en.number("g_mr_hz");
  else en.raw("g_mr_hz", false);
  return [=](double g_mr, double ej_scale) {
    return dimon_spectrum_from_energies(e_cq, e_cm, e_j * ej_scale, g_mr, omega_r);
  };
}

Action parse_circuit_report(Scope& root, Context&) {
  std::optional<double> g_mr_hz;
  const auto source = parse_dimon_source(root, true, &g_mr_hz);
  std::optional<double> target;
  if (root.has("target_chi_qr_hz")) target = root.number("target_chi_qr_hz");
  else root.raw("target_chi_qr_hz", false);
  if (!g_mr_hz && !target) root.fail(root.path(), "give g_mr_hz in the circuit block or target_chi_qr_hz");
  std::optional<std::array<int, 3>> cutoffs;
  if (root.has("numeric_check")) {
    Scope nc(root.raw("numeric_check"), root.at("numeric_check"), root.diagnostics());
    const auto c = nc.numbers("cutoffs", 3);
    if (c.size() == 3) cutoffs = std::array<int, 3>{static_cast<int>(c[0]), static_cast<int>(c[1]), static_cast<int>(c[2])};
    else if (!c.empty()) nc.fail(nc.at("cutoffs"), "expected [qubit, mediator, resonator]");
  } else {
    root.raw("numeric_check", false);
  }
  if (source) {
    check(root, [&] {
      const DimonSpectrum bare = (*source)(0.0, 1.0);
      if (target) invert_chi_qr(hz_to_rad(*target), bare.delta_mr, bare.chi_qm);
    });
  }
  if (cutoffs && ((*cutoffs)[0] < 4 || (*cutoffs)[1] < 4 || (*cutoffs)[2] < 4)) {
    root.fail(root.at("numeric_check.cutoffs"), "every cutoff must be at least 4");
  }
  return [=](Context& ctx) {
    json report;
    double g = g_mr_hz ? hz_to_rad(*g_mr_hz) : 0.0;
    if (target) {
      const DimonSpectrum bare = (*source)(0.0, 1.0);
      const double g_target = invert_chi_qr(hz_to_rad(*target), bare.delta_mr, bare.chi_qm);
      report["g_mr_for_target_hz"] = rad_to_hz(g_target);
      if (!g_mr_hz) g = g_target;
    }
    const DimonSpectrum s = (*source)(g, 1.0);
    report["spectrum"] = spectrum_json(s);
    report["cross_kerr_identity_hz"] = rad_to_hz(-2.0 * std::sqrt(s.delta_q * s.delta_m));
    if (cutoffs) {
      const DispersiveCheck dc = numeric_dispersive_check(s, *cutoffs);
      report["numeric_check"] = {{"chi_qr_hz", rad_to_hz(dc.chi_qr)},
                                 {"chi_mr_hz", rad_to_hz(dc.chi_mr)},
                                 {"cutoffs", dc.cutoffs}};
    }
    ctx.write("circuit.json", dump(report));
    return json{{"omega_q_hz", rad_to_hz(s.omega_q)}, {"chi_qm_hz", rad_to_hz(s.chi_qm)},
                {"chi_qr_hz", rad_to_hz(s.chi_qr)}, {"g_mr_hz", rad_to_hz(s.g_mr)}};
  };
}

Action parse_purcell_sweep(Scope& root, Context& ctx) {
  const auto netlist = parse_netlist(root, ctx, "netlist", "netlist_file");
  const double target_hz = root.positive("target_frequency_hz");
  const std::vector<int> focus = parse_focus(root, "focus_nodes", netlist);
  const std::vector<double> lambdas = root.numbers("lambdas", 1);
  for (double l : lambdas) {
    if (!(std::abs(l) < 1.0)) root.fail(root.at("lambdas"), "junction asymmetry must satisfy |lambda| < 1");
  }
  std::optional<double> g_mr_hz;
  const auto source = parse_dimon_source(root, false, &g_mr_hz);
  const double g_mr = g_mr_hz.value_or(0.0);

  struct FrequencySweep {
    std::vector<double> scales;
    Netlist transmon;
    std::vector<int> transmon_focus;
    double transmon_target_hz = 0.0;
    double lambda = 0.0;
  };
  std::optional<FrequencySweep> sweep;
  if (root.has("frequency_sweep")) {
    Scope fs_(root.raw("frequency_sweep"), root.at("frequency_sweep"), root.diagnostics());
    FrequencySweep f;
    f.scales = fs_.numbers("junction_scales", 1);
    for (double s : f.scales) {
      if (!(s > 0.0)) fs_.fail(fs_.at("junction_scales"), "scales must be positive");
    }
    f.lambda = fs_.number("lambda", lambdas.empty() ? 0.0 : lambdas.back());
    const auto transmon = parse_netlist(fs_, ctx, "transmon_netlist", "transmon_netlist_file");
    f.transmon_focus = parse_focus(fs_, "transmon_focus_nodes", transmon);
    f.transmon_target_hz = fs_.positive("transmon_target_frequency_hz", target_hz);
    if (transmon) {
      f.transmon = *transmon;
      for (double sc : f.scales) {
        if (sc > 0.0) check(fs_, [&] { build_circuit(f.transmon, 0.0, sc); });
      }
    }
    sweep = f;
  } else {
    root.raw("frequency_sweep", false);
  }

  if (netlist) {
    for (double l : lambdas) {
      if (std::abs(l) < 1.0) check(root, [&] { build_circuit(*netlist, l); });
    }
    if (sweep) {
      for (double sc : sweep->scales) {
        if (sc > 0.0) check(root, [&] { build_circuit(*netlist, sweep->lambda, sc); });
      }
    }
  }
  if (source) check(root, [&] { (*source)(hz_to_rad(g_mr), 1.0); });

  return [=](Context& c) {
    std::string csv = "lambda,chi_qr_hz,t1_purcell_s\n";
    std::vector<double> xs, ys;
    const double chi_hz = source ? rad_to_hz((*source)(hz_to_rad(g_mr), 1.0).chi_qr) : kNaN;
    for (double l : lambdas) {
      const LumpedCircuit circuit = build_circuit(*netlist, l);
      const PurcellResult r = purcell_t1(circuit, hz_to_rad(target_hz), focus);
      csv += fmt::format("{},{},{}\n", io::num(l), io::num(chi_hz), io::num(r.t1));
      if (l > 0.0 && std::isfinite(r.t1)) {
        xs.push_back(std::log(l));
        ys.push_back(std::log(r.t1));
      }
    }
    c.write("purcell_lambda.csv", csv);
    std::string modes = "lambda,frequency_hz,gamma_per_s,participation\n";
    for (double l : {lambdas.front(), lambdas.back()}) {
      for (const auto& m : eigenmodes(build_circuit(*netlist, l), focus)) {
        modes += fmt::format("{},{},{},{}\n", io::num(l), io::num(rad_to_hz(m.omega)), io::num(m.gamma),
                             io::num(m.participation));
      }
      if (lambdas.size() == 1) break;
    }
    c.write("modes.csv", modes);
    json summary;
    if (xs.size() >= 2) {
      const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
      const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
      double sxy = 0.0, sxx = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
      }
      summary["t1_lambda_slope"] = sxx > 0.0 ? sxy / sxx : kNaN;
    }
    if (sweep) {
      std::string fcsv = "omega_q_hz,t1_dimon_s,t1_transmon_s,chi_hz\n";
      for (double s : sweep->scales) {
        const double shift = 1.0 / std::sqrt(s);
        const PurcellResult d = purcell_t1(build_circuit(*netlist, sweep->lambda, s), hz_to_rad(target_hz) * shift, focus);
        const PurcellResult t = purcell_t1(build_circuit(sweep->transmon, 0.0, s),
                                           hz_to_rad(sweep->transmon_target_hz) * shift, sweep->transmon_focus);
        // A junction_scale s multiplies the junction inductance, so E_J -> E_J / s.
        const double chi_s = source ? rad_to_hz((*source)(hz_to_rad(g_mr), 1.0 / s).chi_qr) : kNaN;
        fcsv += fmt::format("{},{},{},{}\n", io::num(rad_to_hz(d.omega)), io::num(d.t1), io::num(t.t1),
                            io::num(chi_s));
      }
      c.write("purcell_frequency.csv", fcsv);
    }
    summary["points"] = lambdas.size();
    return summary;
  };
}

Action parse_thermal(Scope& root, Context&) {
  const std::vector<double> levels = root.numbers("levels_hz", 2);
  const double t_mk = root.positive("temperature_mk");
  return [=](Context& ctx) {
    const auto p = thermal_populations(levels, t_mk * 1e-3);
    std::string csv = "level,frequency_hz,population\n";
    for (std::size_t i = 0; i < p.size(); ++i) {
      csv += fmt::format("{},{},{}\n", i, io::num(levels[i]), io::num(p[i]));
    }
    ctx.write("thermal.csv", csv);
    return json{{"populations", p}};
  };
}

Action parse_efficiency(Scope& root, Context&) {
  Scope rs(root.raw("resonator"), root.at("resonator"), root.diagnostics());
  const ResonatorParams params = parse_resonator(rs);
  const double photons = root.positive("photons");
  std::vector<SnrPoint> data;
  std::optional<double> eta;
  if (root.has("data") == root.has("eta")) {
    root.fail(root.path(), "give exactly one of 'eta' (predict the slope) and 'data' (fit the efficiency)");
    root.raw("data", false);
    root.raw("eta", false);
  } else if (root.has("eta")) {
    eta = root.probability("eta");
  } else {
    const json* d = root.raw("data");
    if (!d->is_array() || d->size() < 3) root.fail(root.at("data"), "expected at least 3 points");
    for (std::size_t i = 0; d->is_array() && i < d->size(); ++i) {
      Scope pt(&(*d)[i], root.at("data") + "[" + std::to_string(i) + "]", root.diagnostics());
      data.push_back({pt.positive("tau_int_ns") * 1e-9, pt.number("snr")});
    }
  }
  if (!data.empty() && root.diagnostics()->empty()) check(root, [&] { fit_efficiency(data, params, photons); });
  return [=](Context& ctx) {
    json report;
    if (eta) {
      report = {{"eta", *eta}, {"snr_slope_per_ns", snr_slope(params, photons, *eta) * 1e-9}};
    } else {
      const FitResult fit = fit_efficiency(data, params, photons);
      report = {{"eta", fit.parameters[0]},
                {"eta_stderr", fit.stderr_of(0)},
                {"snr_slope_per_ns", snr_slope(params, photons, fit.parameters[0]) * 1e-9}};
    }
    ctx.write("efficiency.json", dump(report));
    return report;
  };
}

const std::map<std::string, Parser>& parsers() {
  static const std::map<std::string, Parser> table = {
      {"steady-state", parse_steady_state},       {"trajectory", parse_trajectory},
      {"calibrate-photon", parse_calibrate_photon}, {"optimize-pulse", parse_optimize_pulse},
      {"channel-metrics", parse_channel_metrics}, {"simulate-rilb", parse_simulate_rilb},
      {"fit-rilb", parse_fit_rilb},               {"circuit-report", parse_circuit_report},
      {"purcell-sweep", parse_purcell_sweep},     {"thermal", parse_thermal},
      {"efficiency", parse_efficiency},
  };
  return table;
}

struct Prepared {
  Action action;
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
};

Prepared prepare(const std::string& subcommand, const std::string& text, Context& ctx,
                 std::vector<Diagnostic>& diags) {
  Prepared out;
  const auto it = parsers().find(subcommand);
  if (it == parsers().end()) {
    diags.push_back({"$", "unknown subcommand '" + subcommand + "'"});
    return out;
  }
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    diags.push_back({"$", fmt::format("malformed JSON at byte {}: {}", e.byte, e.what())});
    return out;
  }
  Scope root(&doc, "$", &diags);
  if (!root.valid()) return out;
  root.string("description", "");
  if (root.has("output_dir")) out.output_dir = root.string("output_dir");
  if (root.has("seed")) {
    const json* s = root.raw("seed");
    if (s->is_number_unsigned() || (s->is_number_integer() && s->get<long long>() >= 0)) {
      out.seed = s->get<std::uint64_t>();
    } else {
      root.fail("$.seed", "expected a non-negative integer");
    }
  }
  out.action = it->second(root, ctx);
  return out;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {
      "steady-state",  "trajectory", "calibrate-photon", "optimize-pulse", "channel-metrics", "simulate-rilb",
      "fit-rilb",      "circuit-report", "purcell-sweep", "thermal",       "efficiency"};
  return names;
}

std::vector<Diagnostic> validate(const std::string& subcommand, const std::string& config_text,
                                 const fs::path& base_dir) {
  std::vector<Diagnostic> diags;
  Context ctx;
  ctx.base_dir = base_dir;
  prepare(subcommand, config_text, ctx, diags);
  return diags;
}

RunOutcome run(const std::string& subcommand, const std::string& config_text, const RunOptions& options,
               const fs::path& base_dir) {
  RunOutcome outcome;
  Context ctx;
  ctx.base_dir = base_dir;
  ctx.threads = std::max(1, options.threads);
  json summary = {{"command", subcommand}};

  auto fail = [&](int code, std::vector<Diagnostic> diags) {
    outcome.exit_code = code;
    outcome.diagnostics = std::move(diags);
    json list = json::array();
    for (const auto& d : outcome.diagnostics) list.push_back(d.text());
    summary["status"] = code == kNumerical ? "numerical_error" : "invalid";
    summary["diagnostics"] = list;
    outcome.summary = summary.dump();
    return outcome;
  };

  std::vector<Diagnostic> diags;
  const Prepared plan = prepare(subcommand, config_text, ctx, diags);
  if (!diags.empty()) return fail(kInvalid, diags);

  ctx.seed = options.seed.value_or(plan.seed.value_or(0));
  if (options.output_dir) ctx.output_dir = *options.output_dir;
  else if (plan.output_dir) ctx.output_dir = ctx.resolve(*plan.output_dir);
  else ctx.output_dir = ".";

  try {
    std::error_code ec;
    fs::create_directories(ctx.output_dir, ec);
    if (ec) throw ValidationError("cannot create output directory '" + ctx.output_dir.string() + "': " + ec.message());
    json result = plan.action(ctx);
    summary["status"] = "ok";
    summary["seed"] = ctx.seed;
    summary["outputs"] = ctx.outputs;
    summary["result"] = result;
    outcome.summary = summary.dump();
    return outcome;
  } catch (const ValidationError& e) {
    return fail(kInvalid, {{"$", e.what()}});
  } catch (const NumericalError& e) {
    return fail(kNumerical, {{"$", e.what()}});
  } catch (const std::exception& e) {
    return fail(kNumerical, {{"$", e.what()}});
  }
}

}  // namespace rokit::cli
