#pragma once
#include <cstdint>
#include <string>
#include <vector>

namespace droplet {

struct PotentialConfig {
  std::string family = "gaussian_well";
  double a = 1.0;
  double s = 1.0;
};

// one flat config drives every subcommand; unused fields are ignored
struct RunConfig {
  std::string command = "spectrum"; // simulate|spectrum|qsd|verify|sweep
  PotentialConfig potential;
  double beta = 8.0;
  std::vector<double> beta_list; // sweep/window commands; empty -> per-command default
  int n_particles = 2;
  int dim = 1;
  double delta = 0.5;
  double dt = 0.0;    // 0 -> stability default
  double t_max = 10.0;
  int paths = 10000;
  std::uint64_t seed = 1;
  int jobs = 0;       // 0 -> hardware concurrency
  std::string out = "out";
  int grid = 2000;
  int m_eigen = 6;
  std::string form = "weighted"; // weighted|witten|penalized
  int fv_particles = 1000;
  double fv_t_max = 20.0;
  double burn_in = -1.0; // <0 -> auto
  int snapshots = 8;
  int bins = 40;
  std::vector<double> t_list = {1.0, 3.0, 10.0};
  double nu_radius = -1.0; // <0 -> half the ball radius
  std::string sweep_target = "spectrum"; // spectrum|simulate
};

RunConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const RunConfig& c, int indent = 2);
RunConfig load_config_file(const std::string& path);
// throws Error(Config) with a field path on the first violated constraint
void validate_config(const RunConfig& c);

} // namespace droplet
