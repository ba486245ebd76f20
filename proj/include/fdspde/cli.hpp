#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace fdspde {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitAssertion = 2,
  kExitLemma = 3,
};

/// Built-in configuration: sections grid, plan, drifts, output, tolerances.
nlohmann::json default_cli_config();

/// Overlays `overlay` onto `base` section by section. Unknown sections or keys
/// throw ConfigError.
nlohmann::json merge_cli_config(const nlohmann::json& base, const nlohmann::json& overlay);

/// Entry point of the command-line tool. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fdspde
