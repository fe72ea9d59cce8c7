// Command-line front end; all library access goes through the C API.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "droplet.h"
#include "json.hpp"

namespace {

using nlohmann::json;

struct Flags {
  std::string config, out, beta;
  std::uint64_t seed = 0;
  int jobs = 0, n_particles = 0, dim = 0, paths = 0;
  double delta = 0, dt = 0, t_max = 0;
  CLI::Option *o_config = nullptr, *o_out = nullptr, *o_beta = nullptr, *o_seed = nullptr,
              *o_jobs = nullptr, *o_np = nullptr, *o_dim = nullptr, *o_paths = nullptr,
              *o_delta = nullptr, *o_dt = nullptr, *o_tmax = nullptr;
};

void add_flags(CLI::App* cmd, Flags& f) {
  f.o_config = cmd->add_option("--config", f.config, "JSON config file");
  f.o_seed = cmd->add_option("--seed", f.seed, "RNG seed (u64)");
  f.o_jobs = cmd->add_option("--jobs", f.jobs, "worker threads, 0 = all cores");
  f.o_out = cmd->add_option("--out", f.out, "output directory");
  f.o_beta = cmd->add_option("--beta", f.beta,
                             "inverse temperature; a comma list selects a sweep list");
  f.o_np = cmd->add_option("--n-particles", f.n_particles, "number of particles N");
  f.o_dim = cmd->add_option("--dim", f.dim, "ambient dimension d");
  f.o_delta = cmd->add_option("--delta", f.delta, "droplet radius parameter");
  f.o_dt = cmd->add_option("--dt", f.dt, "time step (0 = stability default)");
  f.o_tmax = cmd->add_option("--t-max", f.t_max, "simulation horizon");
  f.o_paths = cmd->add_option("--paths", f.paths, "number of Monte Carlo paths");
}

int run(const std::string& command, const Flags& f) {
  json cfg = json::object();
  if (f.o_config->count() > 0) {
    std::ifstream in(f.config, std::ios::binary);
    if (!in) {
      std::fprintf(stderr, "error: cannot open config file %s\n", f.config.c_str());
      return DL_EIO;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
      cfg = json::parse(ss.str());
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: invalid config JSON: %s\n", e.what());
      return DL_ECONFIG;
    }
  }
  cfg["command"] = command;
  if (f.o_seed->count()) cfg["seed"] = f.seed;
  if (f.o_jobs->count()) cfg["jobs"] = f.jobs;
  if (f.o_out->count()) cfg["out"] = f.out;
  if (f.o_np->count()) cfg["n_particles"] = f.n_particles;
  if (f.o_dim->count()) cfg["dim"] = f.dim;
  if (f.o_delta->count()) cfg["delta"] = f.delta;
  if (f.o_dt->count()) cfg["dt"] = f.dt;
  if (f.o_tmax->count()) cfg["t_max"] = f.t_max;
  if (f.o_paths->count()) cfg["paths"] = f.paths;
  if (f.o_beta->count()) {
    if (f.beta.find(',') != std::string::npos) {
      std::vector<double> list;
      std::stringstream ss(f.beta);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        try {
          list.push_back(std::stod(tok));
        } catch (const std::exception&) {
          std::fprintf(stderr, "error: bad --beta entry '%s'\n", tok.c_str());
          return DL_EINVAL;
        }
      }
      cfg["beta_list"] = list;
      cfg["beta"] = list.front();
    } else {
      try {
        cfg["beta"] = std::stod(f.beta);
      } catch (const std::exception&) {
        std::fprintf(stderr, "error: bad --beta value '%s'\n", f.beta.c_str());
        return DL_EINVAL;
      }
    }
  }
  if (const char* env_out = std::getenv("DROPLET_LAB_OUT"); env_out && *env_out)
    cfg["out"] = env_out; // environment wins over the flag

  char* report = nullptr;
  dl_status st = dl_run_command_json(cfg.dump().c_str(), &report);
  if (st != DL_OK) {
    std::fprintf(stderr, "error: %s\n", dl_last_error());
    return static_cast<int>(st);
  }
  int code = 0;
  try {
    json rep = json::parse(report);
    code = rep.value("exit_code", 0);
    std::printf("%s\n", rep.dump(2).c_str());
  } catch (const std::exception&) {
    std::printf("%s\n", report);
  }
  dl_string_free(report);
  std::printf("outputs in: %s\n",
              cfg.contains("out") ? cfg["out"].get<std::string>().c_str() : "out");
  return code;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("droplet_lab ") + dl_version() +
               " - numerical laboratory for metastable droplets of weakly "
               "interacting diffusions"};
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> cmds = {
      {"simulate", "run the killed particle ensemble and fit the survival rate"},
      {"spectrum", "solve the killed generator eigenproblem on the reduced ball"},
      {"qsd", "Fleming-Viot estimate of the quasi-stationary distribution"},
      {"verify", "check the mixture identity, TV bounds, and the time window"},
      {"sweep", "repeat spectrum or simulate over a list of beta values"},
  };
  std::vector<Flags> flags(cmds.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    CLI::App* sub = app.add_subcommand(cmds[i].first, cmds[i].second);
    add_flags(sub, flags[i]);
    subs.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  for (std::size_t i = 0; i < cmds.size(); ++i)
    if (subs[i]->parsed()) return run(cmds[i].first, flags[i]);
  return 1;
}
