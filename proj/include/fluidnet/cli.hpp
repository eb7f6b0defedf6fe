#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fluidnet {

inline const std::vector<std::string>& cli_commands() {
  static const std::vector<std::string> names = {"simulate",   "stability",  "lyapunov",
                                                 "skorokhod", "fluidlimit", "gfn-check"};
  return names;
}

/// Unset numeric overrides fall back to per-command defaults; the resolved
/// values are logged and recorded in the report.
struct RunConfig {
  std::filesystem::path input;
  std::string command;
  std::filesystem::path out = ".";
  std::uint64_t seed = 42;
  std::optional<double> step;
  std::optional<double> horizon;
  std::optional<std::size_t> samples;
  std::optional<int> depth;
  std::optional<int> multistarts;
  std::optional<std::string> selector;
};

enum ExitStatus : int { kExitOk = 0, kExitError = 1, kExitUnstable = 2 };

/// Executes one command. Writes report.json plus the command's CSVs into
/// config.out. Errors are printed to `err` and mapped to kExitError.
int run(const RunConfig& config, std::ostream& log, std::ostream& err);

}  // namespace fluidnet
