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


#include "rokit/rokit.h"

#include <exception>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rokit/channel.hpp"
#include "rokit/circuit.hpp"
#include "rokit/errors.hpp"
#include "rokit/io.hpp"
#include "rokit/resonator.hpp"
#include "rokit/rilb.hpp"
#include "rokit/session.hpp"

struct rokit_session {
  rokit::cli::RunOptions options;
  std::optional<std::string> config_text;
  std::filesystem::path base_dir = ".";
  std::vector<std::string> diagnostics;
  std::string summary;
  std::string last_error;
};

struct rokit_channel {
  rokit::ReadoutChannel channel;
};

namespace {

rokit_status fail(rokit_session* s, rokit_status status, const std::string& message) {
  if (s != nullptr) s->last_error = message;
  return status;
}

rokit_status status_of(int exit_code) {
  switch (exit_code) {
    case rokit::cli::kOk: return ROKIT_OK;
    case rokit::cli::kNumerical: return ROKIT_ERR_NUMERICAL;
    default: return ROKIT_ERR_INVALID;
  }
}

// Maps library exceptions onto status codes for the stateless entry points.
template <typename F>
rokit_status guarded(F&& f) {
  try {
    f();
    return ROKIT_OK;
  } catch (const rokit::ValidationError&) {
    return ROKIT_ERR_INVALID;
  } catch (const rokit::NumericalError&) {
    return ROKIT_ERR_NUMERICAL;
  } catch (const std::exception&) {
    return ROKIT_ERR_NUMERICAL;
  }
}

}  // namespace

extern "C" {

const char* rokit_version(void) { return ROKIT_VERSION_STRING; }

size_t rokit_subcommand_count(void) { return rokit::cli::subcommands().size(); }

const char* rokit_subcommand_name(size_t index) {
  const auto& names = rokit::cli::subcommands();
  return index < names.size() ? names[index].c_str() : nullptr;
}

int rokit_exit_code(rokit_status status) {
  switch (status) {
    case ROKIT_OK: return 0;
    case ROKIT_ERR_NUMERICAL: return 3;
    default: return 2;
  }
}

rokit_session* rokit_session_create(void) {
  try {
    return new rokit_session();
  } catch (...) {
    return nullptr;
  }
}

void rokit_session_destroy(rokit_session* session) { delete session; }

rokit_status rokit_session_set_threads(rokit_session* session, int threads) {
  if (session == nullptr) return ROKIT_ERR_ARGUMENT;
  if (threads < 1) return fail(session, ROKIT_ERR_ARGUMENT, "threads must be at least 1");
  session->options.threads = threads;
  return ROKIT_OK;
}

rokit_status rokit_session_set_seed(rokit_session* session, uint64_t seed) {
  if (session == nullptr) return ROKIT_ERR_ARGUMENT;
  session->options.seed = seed;
  return ROKIT_OK;
}

rokit_status rokit_session_set_output_dir(rokit_session* session, const char* path) {
  if (session == nullptr) return ROKIT_ERR_ARGUMENT;
  if (path == nullptr || *path == '\0') return fail(session, ROKIT_ERR_ARGUMENT, "empty output directory");
  session->options.output_dir = std::filesystem::path(path);
  return ROKIT_OK;
}

rokit_status rokit_session_load_config(rokit_session* session, const char* path) {
  if (session == nullptr) return ROKIT_ERR_ARGUMENT;
  if (path == nullptr) return fail(session, ROKIT_ERR_ARGUMENT, "null config path");
  try {
    session->config_text = rokit::io::read_text(path);
    session->base_dir = std::filesystem::path(path).parent_path();
    if (session->base_dir.empty()) session->base_dir = ".";
    return ROKIT_OK;
  } catch (const std::exception& e) {
    session->config_text.reset();
    return fail(session, ROKIT_ERR_INVALID, e.what());
  }
}

rokit_status rokit_session_load_config_text(rokit_session* session, const char* json_text, const char* base_dir) {
  if (session == nullptr) return ROKIT_ERR_ARGUMENT;
  if (json_text == nullptr) return fail(session, ROKIT_ERR_ARGUMENT, "null config text");
  session->config_text = std::string(json_text);
  session->base_dir = base_dir != nullptr && *base_dir != '\0' ? std::filesystem::path(base_dir) : ".";
  return ROKIT_OK;
}

rokit_status rokit_session_validate(rokit_session* session, const char* subcommand) {
  if (session == nullptr) return ROKIT_ERR_ARGUMENT;
  if (subcommand == nullptr) return fail(session, ROKIT_ERR_ARGUMENT, "null subcommand");
  if (!session->config_text) return fail(session, ROKIT_ERR_INVALID, "no config loaded");
  try {
    session->diagnostics.clear();
    for (const auto& d : rokit::cli::validate(subcommand, *session->config_text, session->base_dir)) {
      session->diagnostics.push_back(d.text());
    }
    if (!session->diagnostics.empty()) return fail(session, ROKIT_ERR_INVALID, session->diagnostics.front());
    return ROKIT_OK;
  } catch (const std::exception& e) {
    return fail(session, ROKIT_ERR_INVALID, e.what());
  }
}

size_t rokit_session_diagnostic_count(const rokit_session* session) {
  return session == nullptr ? 0 : session->diagnostics.size();
}

const char* rokit_session_diagnostic(const rokit_session* session, size_t index) {
  if (session == nullptr || index >= session->diagnostics.size()) return nullptr;
  return session->diagnostics[index].c_str();
}

rokit_status rokit_session_run(rokit_session* session, const char* subcommand) {
  if (session == nullptr) return ROKIT_ERR_ARGUMENT;
  if (subcommand == nullptr) return fail(session, ROKIT_ERR_ARGUMENT, "null subcommand");
  if (!session->config_text) return fail(session, ROKIT_ERR_INVALID, "no config loaded");
  try {
    const auto outcome = rokit::cli::run(subcommand, *session->config_text, session->options, session->base_dir);
    session->summary = outcome.summary;
    session->diagnostics.clear();
    for (const auto& d : outcome.diagnostics) session->diagnostics.push_back(d.text());
    const rokit_status status = status_of(outcome.exit_code);
    if (status != ROKIT_OK) {
      return fail(session, status, session->diagnostics.empty() ? "run failed" : session->diagnostics.front());
    }
    session->last_error.clear();
    return ROKIT_OK;
  } catch (const std::exception& e) {
    return fail(session, ROKIT_ERR_NUMERICAL, e.what());
  }
}

const char* rokit_session_summary(const rokit_session* session) {
  return session == nullptr ? nullptr : session->summary.c_str();
}

const char* rokit_session_last_error(const rokit_session* session) {
  return session == nullptr ? "null session" : session->last_error.c_str();
}

rokit_status rokit_snr_slope(double kappa_r_hz, double kappa_ext_hz, double chi_qr_hz, double photons, double eta,
                             double* out_per_second) {
  if (out_per_second == nullptr) return ROKIT_ERR_ARGUMENT;
  return guarded([&] {
    const auto p = rokit::ResonatorParams::from_hz(kappa_r_hz, kappa_ext_hz, kappa_r_hz - kappa_ext_hz, 0.0, chi_qr_hz);
    p.validate();
    *out_per_second = rokit::snr_slope(p, photons, eta);
  });
}

rokit_status rokit_superoperator_leakage(double l_up, double l_down, int m, double p_ini, double* out) {
  if (out == nullptr) return ROKIT_ERR_ARGUMENT;
  return guarded([&] {
    rokit::LeakageModel model;
    model.l_up = l_up;
    model.l_down = l_down;
    model.validate();
    *out = rokit::superoperator_leakage(model, m, p_ini);
  });
}

rokit_status rokit_thermal_populations(const double* levels_hz, size_t count, double temperature_k,
                                       double* out_populations) {
  if (levels_hz == nullptr || out_populations == nullptr) return ROKIT_ERR_ARGUMENT;
  return guarded([&] {
    const auto p = rokit::thermal_populations(std::span<const double>(levels_hz, count), temperature_k);
    std::copy(p.begin(), p.end(), out_populations);
  });
}

rokit_status rokit_channel_create(const double* joint, double p0_leaked_g, double p0_leaked_e, rokit_channel** out) {
  if (joint == nullptr || out == nullptr) return ROKIT_ERR_ARGUMENT;
  *out = nullptr;
  return guarded([&] {
    rokit::ReadoutChannel ch;
    for (int s = 0; s < 2; ++s) {
      for (int post = 0; post < 3; ++post) {
        for (int x = 0; x < 2; ++x) ch.joint[s][post][x] = joint[s * 6 + post * 2 + x];
      }
    }
    ch.p0_leaked_g = p0_leaked_g;
    ch.p0_leaked_e = p0_leaked_e;
    ch.validate(1e-9);
    *out = new rokit_channel{ch};
  });
}

void rokit_channel_destroy(rokit_channel* channel) { delete channel; }

rokit_status rokit_channel_metrics(const rokit_channel* channel, double* out) {
  if (channel == nullptr || out == nullptr) return ROKIT_ERR_ARGUMENT;
  return guarded([&] {
    const auto m = rokit::metrics_from_channel(channel->channel);
    using V = rokit::ChannelMetrics::Values;
    int i = 0;
    for (double V::*field : {&V::fidelity, &V::repeatability, &V::qndness, &V::qnd_fidelity, &V::xi, &V::leakage}) {
      out[i++] = m.g.*field;
      out[i++] = m.e.*field;
      out[i++] = m.mean.*field;
    }
  });
}

}  // extern "C"
