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


// Command-line front end. Talks to the library only through the C interface.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <string>

#include <CLI11.hpp>

#include "rokit/rokit.h"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 1;
  bool validate_only = false;
  std::string log;
};

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

// Summary line for failures that happen before the library produces one.
std::string error_line(const std::string& command, const char* status, const std::string& message) {
  return "{\"command\":\"" + json_escape(command) + "\",\"diagnostics\":[\"" + json_escape(message) +
         "\"],\"status\":\"" + status + "\"}";
}

void append_log(const std::string& path, const std::string& command, int code, double seconds) {
  if (path.empty()) return;
  std::ofstream log(path, std::ios::app);
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  log << stamp << ' ' << command << " exit=" << code << " seconds=" << seconds << '\n';
}

int execute(const std::string& command, const Flags& flags, bool seed_given, bool out_given) {
  rokit_session* session = rokit_session_create();
  if (session == nullptr) {
    std::puts(error_line(command, "invalid", "out of memory").c_str());
    return 2;
  }
  rokit_status status = rokit_session_load_config(session, flags.config.c_str());
  if (status == ROKIT_OK) status = rokit_session_set_threads(session, flags.threads);
  if (status == ROKIT_OK && seed_given) status = rokit_session_set_seed(session, flags.seed);
  if (status == ROKIT_OK && out_given) status = rokit_session_set_output_dir(session, flags.out.c_str());
  if (status != ROKIT_OK) {
    std::puts(error_line(command, "invalid", rokit_session_last_error(session)).c_str());
    std::fprintf(stderr, "error: %s\n", rokit_session_last_error(session));
    rokit_session_destroy(session);
    return 2;
  }

  int code = 0;
  if (flags.validate_only) {
    status = rokit_session_validate(session, command.c_str());
    std::string line = "{\"command\":\"" + json_escape(command) + "\",\"diagnostics\":[";
    for (size_t i = 0; i < rokit_session_diagnostic_count(session); ++i) {
      const char* d = rokit_session_diagnostic(session, i);
      line += (i ? ",\"" : "\"") + json_escape(d) + "\"";
      std::fprintf(stderr, "%s\n", d);
    }
    line += std::string("],\"status\":\"") + (status == ROKIT_OK ? "valid" : "invalid") + "\"}";
    std::puts(line.c_str());
    code = rokit_exit_code(status);
  } else {
    status = rokit_session_run(session, command.c_str());
    std::puts(rokit_session_summary(session));
    for (size_t i = 0; i < rokit_session_diagnostic_count(session); ++i) {
      std::fprintf(stderr, "%s\n", rokit_session_diagnostic(session, i));
    }
    code = rokit_exit_code(status);
  }
  rokit_session_destroy(session);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rokit: readout simulation and characterization toolkit"};
  app.set_version_flag("--version", rokit_version());
  app.require_subcommand(1);

  Flags flags;
  std::string chosen;
  bool seed_given = false, out_given = false;
  for (size_t i = 0; i < rokit_subcommand_count(); ++i) {
    const std::string name = rokit_subcommand_name(i);
    CLI::App* sub = app.add_subcommand(name, "run " + name);
    sub->add_option("--config", flags.config, "JSON config file")->required();
    auto* out = sub->add_option("--out", flags.out, "output directory (overrides output_dir)");
    auto* seed = sub->add_option("--seed", flags.seed, "RNG seed (overrides seed)");
    sub->add_option("--threads", flags.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--validate-only", flags.validate_only, "check the config and exit");
    sub->add_option("--log", flags.log, "append a timestamped line to this log file");
    sub->callback([&, name, out, seed] {
      chosen = name;
      seed_given = seed->count() > 0;
      out_given = out->count() > 0;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const auto start = std::chrono::steady_clock::now();
  const int code = execute(chosen, flags, seed_given, out_given);
  append_log(flags.log, chosen, code,
             std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return code;
}
