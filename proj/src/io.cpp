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


#include "rokit/io.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <fmt/format.h>

namespace rokit::io {

namespace {

constexpr char kRawMagic[8] = {'R', 'O', 'K', 'I', 'T', 'R', 'L', 'B'};

const json& member(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ValidationError(where + "." + key + ": missing");
  return *it;
}

double number(const json& j, const char* key, const std::string& where) {
  const json& v = member(j, key, where);
  if (!v.is_number()) throw ValidationError(where + "." + key + ": expected a number");
  return v.get<double>();
}

void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* allowed : keys) known = known || k == allowed;
    if (!known) throw ValidationError(where + "." + k + ": unknown key");
  }
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& in, std::size_t& pos) {
  if (pos + 8 > in.size()) throw ValidationError("rilb raw file: truncated header");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += 8;
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream s(line);
  while (std::getline(s, cur, sep)) {
    const auto a = cur.find_first_not_of(" \t\r");
    const auto b = cur.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? std::string() : cur.substr(a, b - a + 1));
  }
  return out;
}

}  // namespace

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{}", v);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "' for reading");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw ValidationError("write to '" + path.string() + "' failed");
}

std::string trajectory_csv(const Trajectory& traj) {
  std::vector<double> m;
  try {
    m = measurement_rate(traj);
  } catch (const DegenerateReadout&) {
    m.assign(traj.times.size(), 0.0);
  }
  std::string out = "t_ns,re_alpha_g,im_alpha_g,re_alpha_e,im_alpha_e,M_norm\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    out += fmt::format("{},{},{},{},{},{}\n", num(traj.times[i] * 1e9), num(traj.alpha_g[i].real()),
                       num(traj.alpha_g[i].imag()), num(traj.alpha_e[i].real()), num(traj.alpha_e[i].imag()),
                       num(m[i]));
  }
  return out;
}

json pulse_to_json(const ShapedPulse& pulse) {
  json segs = json::array();
  for (const auto& s : pulse.segments) {
    segs.push_back({{"re_amp", s.amplitude_hz.real()}, {"im_amp", s.amplitude_hz.imag()}, {"length_ns", s.length_ns}});
  }
  return {{"detuning_hz", pulse.detuning_hz}, {"segments", segs}};
}

ShapedPulse pulse_from_json(const json& j, const std::string& where) {
  only_keys(j, {"detuning_hz", "segments"}, where);
  ShapedPulse p;
  p.detuning_hz = number(j, "detuning_hz", where);
  const json& segs = member(j, "segments", where);
  if (!segs.is_array()) throw ValidationError(where + ".segments: expected an array");
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const std::string w = where + ".segments[" + std::to_string(i) + "]";
    only_keys(segs[i], {"re_amp", "im_amp", "length_ns"}, w);
    p.segments.push_back({{number(segs[i], "re_amp", w), number(segs[i], "im_amp", w)}, number(segs[i], "length_ns", w)});
  }
  try {
    p.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
  return p;
}

std::string pulse_text(const ShapedPulse& pulse) { return pulse_to_json(pulse).dump(2) + "\n"; }

json channel_to_json(const ReadoutChannel& ch) {
  auto row = [&](Qubit s) {
    return json{{"g0", ch.p(s, Post::g, 0)},      {"g1", ch.p(s, Post::g, 1)},
                {"e0", ch.p(s, Post::e, 0)},      {"e1", ch.p(s, Post::e, 1)},
                {"l0", ch.p(s, Post::leaked, 0)}, {"l1", ch.p(s, Post::leaked, 1)}};
  };
  return {{"given_g", row(Qubit::g)},
          {"given_e", row(Qubit::e)},
          {"p0_given_lg", ch.p0_leaked_g},
          {"p0_given_le", ch.p0_leaked_e}};
}

ReadoutChannel channel_from_json(const json& j, const std::string& where) {
  only_keys(j, {"given_g", "given_e", "p0_given_lg", "p0_given_le"}, where);
  ReadoutChannel ch;
  for (Qubit s : {Qubit::g, Qubit::e}) {
    const char* key = s == Qubit::g ? "given_g" : "given_e";
    const std::string w = where + "." + key;
    const json& row = member(j, key, where);
    only_keys(row, {"g0", "g1", "e0", "e1", "l0", "l1"}, w);
    ch.p(s, Post::g, 0) = number(row, "g0", w);
    ch.p(s, Post::g, 1) = number(row, "g1", w);
    ch.p(s, Post::e, 0) = number(row, "e0", w);
    ch.p(s, Post::e, 1) = number(row, "e1", w);
    ch.p(s, Post::leaked, 0) = number(row, "l0", w);
    ch.p(s, Post::leaked, 1) = number(row, "l1", w);
    double total = 0.0;
    for (Post post : {Post::g, Post::e, Post::leaked}) total += ch.p(s, post, 0) + ch.p(s, post, 1);
    if (std::abs(total - 1.0) > 1e-9) {
      throw ValidationError(w + ": probabilities sum to " + num(total) + ", not 1");
    }
  }
  ch.p0_leaked_g = number(j, "p0_given_lg", where);
  ch.p0_leaked_e = number(j, "p0_given_le", where);
  try {
    ch.validate(1e-9);
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
  return ch;
}

std::string metrics_csv_header() {
  return "channel,F_g,F_e,F,R_g,R_e,R,Q_g,Q_e,Q,F_qnd_g,F_qnd_e,F_qnd,Xi_g,Xi_e,Xi,L_g,L_e,L\n";
}

std::string metrics_csv_row(const std::string& name, const ChannelMetrics& m) {
  using V = ChannelMetrics::Values;
  std::string out = name;
  for (double V::*field : {&V::fidelity, &V::repeatability, &V::qndness, &V::qnd_fidelity, &V::xi, &V::leakage}) {
    out += "," + num(m.g.*field) + "," + num(m.e.*field) + "," + num(m.mean.*field);
  }
  return out + "\n";
}

void write_rilb_raw(const std::filesystem::path& path, const RILBRun& run) {
  const auto& c = run.config;
  std::string out(kRawMagic, sizeof(kRawMagic));
  put_u64(out, static_cast<std::uint64_t>(c.m_cycles));
  put_u64(out, static_cast<std::uint64_t>(c.k_randomizations));
  put_u64(out, static_cast<std::uint64_t>(c.n_shots));
  put_u64(out, c.seed);
  const std::size_t in_bits = static_cast<std::size_t>(c.k_randomizations) * static_cast<std::size_t>(c.m_cycles);
  std::string inputs((in_bits + 7) / 8, '\0');
  for (std::size_t k = 0; k < run.sequences.size(); ++k) {
    for (std::size_t m = 0; m < run.sequences[k].size(); ++m) {
      if (!run.sequences[k][m]) continue;
      const std::size_t bit = k * static_cast<std::size_t>(c.m_cycles) + m;
      inputs[bit >> 3] = static_cast<char>(static_cast<unsigned char>(inputs[bit >> 3]) | (1u << (bit & 7)));
    }
  }
  out += inputs;
  out.append(reinterpret_cast<const char*>(run.packed.data()), run.packed.size());
  write_text(path, out);
}

RILBRun read_rilb_raw(const std::filesystem::path& path) {
  const std::string in = read_text(path);
  if (in.size() < sizeof(kRawMagic) || std::memcmp(in.data(), kRawMagic, sizeof(kRawMagic)) != 0) {
    throw ValidationError("'" + path.string() + "' is not a raw RILB file");
  }
  std::size_t pos = sizeof(kRawMagic);
  RILBRun run;
  run.config.m_cycles = static_cast<int>(get_u64(in, pos));
  run.config.k_randomizations = static_cast<int>(get_u64(in, pos));
  run.config.n_shots = static_cast<int>(get_u64(in, pos));
  run.config.seed = get_u64(in, pos);
  run.config.validate();
  const auto M = static_cast<std::size_t>(run.config.m_cycles);
  const auto K = static_cast<std::size_t>(run.config.k_randomizations);
  const auto N = static_cast<std::size_t>(run.config.n_shots);
  const std::size_t in_bytes = (K * M + 7) / 8;
  const std::size_t out_bytes = (K * N * (M + 1) + 7) / 8;
  if (in.size() != pos + in_bytes + out_bytes) throw ValidationError("raw RILB file has the wrong length");
  run.sequences.assign(K, std::vector<bool>(M));
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t m = 0; m < M; ++m) {
      const std::size_t bit = k * M + m;
      run.sequences[k][m] = (static_cast<unsigned char>(in[pos + (bit >> 3)]) >> (bit & 7)) & 1u;
    }
  }
  pos += in_bytes;
  run.packed.assign(in.begin() + static_cast<std::ptrdiff_t>(pos), in.end());
  return run;
}

std::string aggregate_csv(const RILBResult& r) {
  std::string out = "m,mean_corr,stderr,mean_corr_X,mean_corr_I\n";
  for (std::size_t i = 0; i < r.mean_correlation.size(); ++i) {
    out += fmt::format("{},{},{},{},{}\n", i + 1, num(r.mean_correlation[i]), num(r.stderr_[i]), num(r.mean_x[i]),
                       num(r.mean_i[i]));
  }
  return out;
}

RILBResult aggregate_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("aggregate csv: empty");
  const auto header = split(line, ',');
  const std::vector<std::string> expected = {"m", "mean_corr", "stderr", "mean_corr_X", "mean_corr_I"};
  if (header != expected) throw ValidationError("aggregate csv: header must be m,mean_corr,stderr,mean_corr_X,mean_corr_I");
  RILBResult r;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = split(line, ',');
    if (f.size() != 5) throw ValidationError("aggregate csv: line " + std::to_string(row) + " needs 5 fields");
    try {
      if (std::stoi(f[0]) != static_cast<int>(r.mean_correlation.size()) + 1) {
        throw ValidationError("aggregate csv: line " + std::to_string(row) + " breaks the m = 1, 2, ... order");
      }
      r.mean_correlation.push_back(std::stod(f[1]));
      r.stderr_.push_back(std::stod(f[2]));
      r.mean_x.push_back(std::stod(f[3]));
      r.mean_i.push_back(std::stod(f[4]));
    } catch (const std::logic_error&) {
      throw ValidationError("aggregate csv: line " + std::to_string(row) + " has a malformed number");
    }
  }
  r.count_x.assign(r.mean_correlation.size(), 0);
  r.count_i.assign(r.mean_correlation.size(), 0);
  return r;
}

json leakage_fit_json(const LeakageFit& fit) {
  return {{"A", fit.a()},
          {"B", fit.b()},
          {"L", fit.rate()},
          {"L_stderr", fit.rate_stderr()},
          {"L_ci95", fit.rate_interval},
          {"resolved", fit.resolved},
          {"decay_p_value", fit.decay_p_value},
          {"converged", fit.fit.converged},
          {"clamped", fit.clamped},
          {"pinned", fit.pinned}};
}

json netlist_to_json(const Netlist& netlist) {
  json elements = json::array();
  for (const auto& e : netlist.elements) {
    json el = {{"type", std::string(1, e.type)}, {"nodes", {e.a, e.b}}, {"value", e.value}};
    if (e.asymmetry != 0) el["asymmetry"] = e.asymmetry;
    elements.push_back(el);
  }
  return {{"nodes", netlist.nodes}, {"elements", elements}};
}

Netlist netlist_from_json(const json& j, const std::string& where) {
  only_keys(j, {"nodes", "elements"}, where);
  Netlist nl;
  const json& nodes = member(j, "nodes", where);
  if (!nodes.is_array()) throw ValidationError(where + ".nodes: expected an array of labels");
  for (const auto& n : nodes) {
    if (!n.is_string()) throw ValidationError(where + ".nodes: labels must be strings");
    nl.nodes.push_back(n.get<std::string>());
  }
  auto node_index = [&](const json& v, const std::string& w) {
    if (v.is_number_integer()) return v.get<int>();
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s == "gnd" || s == "0") return 0;
      for (std::size_t i = 0; i < nl.nodes.size(); ++i) {
        if (nl.nodes[i] == s) return static_cast<int>(i) + 1;
      }
    }
    throw ValidationError(w + ": unknown node (use an index, a label or \"gnd\")");
  };
  const json& elements = member(j, "elements", where);
  if (!elements.is_array()) throw ValidationError(where + ".elements: expected an array");
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const std::string w = where + ".elements[" + std::to_string(i) + "]";
    const json& el = elements[i];
    only_keys(el, {"type", "nodes", "value", "asymmetry"}, w);
    const json& type = member(el, "type", w);
    if (!type.is_string() || type.get<std::string>().size() != 1) throw ValidationError(w + ".type: expected C, L, J or R");
    const json& ends = member(el, "nodes", w);
    if (!ends.is_array() || ends.size() != 2) throw ValidationError(w + ".nodes: expected two nodes");
    CircuitElement e;
    e.type = type.get<std::string>()[0];
    e.a = node_index(ends[0], w + ".nodes[0]");
    e.b = node_index(ends[1], w + ".nodes[1]");
    e.value = number(el, "value", w);
    if (el.contains("asymmetry")) {
      const json& a = el["asymmetry"];
      if (!a.is_number_integer() || std::abs(a.get<int>()) > 1) throw ValidationError(w + ".asymmetry: expected -1, 0 or 1");
      e.asymmetry = a.get<int>();
    }
    nl.elements.push_back(e);
  }
  try {
    nl.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
  return nl;
}

}  // namespace rokit::io
