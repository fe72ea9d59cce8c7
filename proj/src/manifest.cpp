#include "droplet/manifest.hpp"

#include <fstream>

#include "droplet/potential.hpp"
#include "json.hpp"

namespace droplet {

std::string library_version() { return "0.1.0"; }

void write_manifest(const std::string& dir, const std::string& config_json,
                    const std::vector<OutputFile>& outputs, double wall_seconds,
                    const std::string& report_json) {
  nlohmann::json j;
  j["version"] = library_version();
  try {
    j["config"] = nlohmann::json::parse(config_json);
  } catch (const std::exception&) {
    j["config"] = config_json;
  }
  nlohmann::json outs = nlohmann::json::array();
  for (const auto& o : outputs) outs.push_back({{"path", o.path}, {"digest", o.digest}});
  j["outputs"] = outs;
  j["wall_seconds"] = wall_seconds;
  if (!report_json.empty()) {
    try {
      j["report"] = nlohmann::json::parse(report_json);
    } catch (const std::exception&) {
      j["report"] = report_json;
    }
  }
  std::string path = dir + "/manifest.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Error::Code::Io, "cannot write " + path);
  out << j.dump(2) << "\n";
}

} // namespace droplet
