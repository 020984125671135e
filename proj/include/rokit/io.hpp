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


#ifndef ROKIT_IO_HPP
#define ROKIT_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "rokit/channel.hpp"
#include "rokit/circuit.hpp"
#include "rokit/pulse.hpp"
#include "rokit/resonator.hpp"
#include "rokit/rilb.hpp"

namespace rokit::io {

using nlohmann::json;

// All writers throw ValidationError on I/O failure; readers also on malformed content.

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

// t_ns, re_alpha_g, im_alpha_g, re_alpha_e, im_alpha_e, M_norm
std::string trajectory_csv(const Trajectory& traj);

// {"detuning_hz": ..., "segments": [{"re_amp": ..., "im_amp": ..., "length_ns": ...}]}
// Amplitudes are A/2pi in Hz.
json pulse_to_json(const ShapedPulse& pulse);
ShapedPulse pulse_from_json(const json& j, const std::string& where = "$");
std::string pulse_text(const ShapedPulse& pulse);

// {"given_g": {"g0","g1","e0","e1","l0","l1"}, "given_e": {...}, "p0_given_lg", "p0_given_le"}
json channel_to_json(const ReadoutChannel& ch);
ReadoutChannel channel_from_json(const json& j, const std::string& where = "$");

std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& name, const ChannelMetrics& m);

// Raw RILB outcomes: magic "ROKITRLB", then little-endian u64 M, K, N, seed,
// then K*M packed input bits (1 = X), then the packed outcomes of RILBRun.
void write_rilb_raw(const std::filesystem::path& path, const RILBRun& run);
RILBRun read_rilb_raw(const std::filesystem::path& path);

// m, mean_corr, stderr, mean_corr_X, mean_corr_I
std::string aggregate_csv(const RILBResult& result);
RILBResult aggregate_from_csv(const std::string& text);

// {A, B, L, L_stderr, converged}
json leakage_fit_json(const LeakageFit& fit);

json netlist_to_json(const Netlist& netlist);
Netlist netlist_from_json(const json& j, const std::string& where = "$");

// Number formatting shared by every writer (shortest round-trip form).
std::string num(double v);

}  // namespace rokit::io

#endif  // ROKIT_IO_HPP
