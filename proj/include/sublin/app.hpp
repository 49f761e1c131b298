#pragma once

// Config-driven runners behind the command-line subcommands.

#include <string>
#include <vector>

#include <json.hpp>

namespace sublin::app {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

struct RunOptions {
  std::string output_dir;  ///< empty: no files are written
  unsigned workers = 1;
  bool quick = false;      ///< selftest only: the short suite
};

struct RunResult {
  int exit_code = 0;  ///< 0 ok, 1 dominance or acceptance failure
  json summary;       ///< always carries "effective_config" for stochastic runs
  std::vector<std::string> files;
};

std::vector<std::string> subcommands();

/// Parses a config document. Malformed JSON raises ConfigError naming line and column.
json parse_config(const std::string& text);

/// Runs one subcommand. Configuration problems raise ConfigError.
RunResult run(const std::string& subcommand, const json& config, const RunOptions& options);

/// Frozen constants shipped with the library: bound -> family -> p -> value.
const json& calibrated_constants();

}  // namespace sublin::app
