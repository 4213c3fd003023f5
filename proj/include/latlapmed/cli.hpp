// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace latlapmed::cli {

// Exit codes: 0 success, 2 validation / usage error, 3 numerical failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

struct RunSpec {
  nlohmann::json config;  // merged document after overrides
  uint64_t seed = 0;
  std::filesystem::path out_dir = "out";
  std::string method = "latlapmed";
  int workers = 1;
  // Relative data paths resolve against the config file's directory.
  std::filesystem::path base_dir = ".";
};

void cmd_simulate(const RunSpec& spec);
void cmd_fit(const RunSpec& spec);
void cmd_predict(const RunSpec& spec);
void cmd_sweep(const RunSpec& spec);
void cmd_bench(const RunSpec& spec);

// Loads the config file, applies "section.key=value" overrides, fills the
// spec.  Throws ValidationError on unknown fields or malformed values.
RunSpec make_run_spec(const std::string& config_path, uint64_t seed,
                      const std::string& out_dir, const std::string& method,
                      int workers, const std::vector<std::string>& overrides);

// Full command line; returns the process exit code.
int run(int argc, const char* const* argv);

}  // namespace latlapmed::cli
