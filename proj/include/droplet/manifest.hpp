#pragma once
#include <string>
#include <vector>

namespace droplet {

struct OutputFile {
  std::string path;   // relative to the output directory
  std::string digest; // fnv1a-64 hex of the file bytes
};

std::string library_version();

// writes <dir>/manifest.json: config snapshot, seed, version, outputs with
// digests, wall time, and the machine-readable report
void write_manifest(const std::string& dir, const std::string& config_json,
                    const std::vector<OutputFile>& outputs, double wall_seconds,
                    const std::string& report_json);

} // namespace droplet
