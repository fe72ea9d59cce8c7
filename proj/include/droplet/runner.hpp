#pragma once
#include <string>
#include <vector>

#include "droplet/config.hpp"

namespace droplet {

struct RunResult {
  int exit_code = 0;
  std::string report_json;        // machine-readable summary
  std::vector<std::string> files; // paths of everything written
};

// validate, dispatch on cfg.command, write CSV outputs + manifest.json
RunResult run_command(const RunConfig& cfg);

} // namespace droplet
