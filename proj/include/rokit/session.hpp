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


#ifndef ROKIT_SESSION_HPP
#define ROKIT_SESSION_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rokit::cli {

struct Diagnostic {
  std::string path;  // JSON path such as "$.resonator.kappa_ext_hz"
  std::string message;

  std::string text() const { return path + ": " + message; }
};

enum ExitCode : int { kOk = 0, kInvalid = 2, kNumerical = 3 };

struct RunOptions {
  std::optional<std::filesystem::path> output_dir;  // overrides the config's output_dir
  std::optional<std::uint64_t> seed;                // overrides the config's seed
  int threads = 1;
};

struct RunOutcome {
  int exit_code = kOk;
  std::string summary;  // one-line JSON
  std::vector<Diagnostic> diagnostics;
};

const std::vector<std::string>& subcommands();

// Parses and checks a config for `subcommand` without running anything.
// Relative file references resolve against `base_dir`. An empty result means
// the config is valid.
std::vector<Diagnostic> validate(const std::string& subcommand, const std::string& config_text,
                                 const std::filesystem::path& base_dir = ".");

// Same parsing path as validate(), then executes and writes result files.
RunOutcome run(const std::string& subcommand, const std::string& config_text, const RunOptions& options,
               const std::filesystem::path& base_dir = ".");

}  // namespace rokit::cli

#endif  // ROKIT_SESSION_HPP
