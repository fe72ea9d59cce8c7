#include "droplet/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "droplet/potential.hpp"
#include "json.hpp"

namespace droplet {

using nlohmann::json;

namespace {

template <class T>
void take(const json& j, const char* key, T& slot) {
  if (j.contains(key)) slot = j.at(key).get<T>();
}

json to_json(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["potential"] = {{"family", c.potential.family}, {"a", c.potential.a}, {"s", c.potential.s}};
  j["beta"] = c.beta;
  j["beta_list"] = c.beta_list;
  j["n_particles"] = c.n_particles;
  j["dim"] = c.dim;
  j["delta"] = c.delta;
  j["dt"] = c.dt;
  j["t_max"] = c.t_max;
  j["paths"] = c.paths;
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  j["out"] = c.out;
  j["grid"] = c.grid;
  j["m_eigen"] = c.m_eigen;
  j["form"] = c.form;
  j["fv_particles"] = c.fv_particles;
  j["fv_t_max"] = c.fv_t_max;
  j["burn_in"] = c.burn_in;
  j["snapshots"] = c.snapshots;
  j["bins"] = c.bins;
  j["t_list"] = c.t_list;
  j["nu_radius"] = c.nu_radius;
  j["sweep_target"] = c.sweep_target;
  return j;
}

RunConfig from_json(const json& j) {
  RunConfig c;
  take(j, "command", c.command);
  if (j.contains("potential")) {
    const json& p = j.at("potential");
    take(p, "family", c.potential.family);
    take(p, "a", c.potential.a);
    take(p, "s", c.potential.s);
  }
  take(j, "beta", c.beta);
  take(j, "beta_list", c.beta_list);
  take(j, "n_particles", c.n_particles);
  take(j, "dim", c.dim);
  take(j, "delta", c.delta);
  take(j, "dt", c.dt);
  take(j, "t_max", c.t_max);
  take(j, "paths", c.paths);
  take(j, "seed", c.seed);
  take(j, "jobs", c.jobs);
  take(j, "out", c.out);
  take(j, "grid", c.grid);
  take(j, "m_eigen", c.m_eigen);
  take(j, "form", c.form);
  take(j, "fv_particles", c.fv_particles);
  take(j, "fv_t_max", c.fv_t_max);
  take(j, "burn_in", c.burn_in);
  take(j, "snapshots", c.snapshots);
  take(j, "bins", c.bins);
  take(j, "t_list", c.t_list);
  take(j, "nu_radius", c.nu_radius);
  take(j, "sweep_target", c.sweep_target);
  return c;
}

} // namespace

RunConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw Error(Error::Code::Config, std::string("config: invalid JSON: ") + e.what());
  }
  try {
    return from_json(j);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(Error::Code::Config, std::string("config: ") + e.what());
  }
}

std::string config_to_json_text(const RunConfig& c, int indent) {
  return to_json(c).dump(indent) + "\n";
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Error::Code::Io, "config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json_text(ss.str());
}

void validate_config(const RunConfig& c) {
  static const std::set<std::string> commands = {"simulate", "spectrum", "qsd", "verify",
                                                 "sweep"};
  if (!commands.count(c.command))
    throw Error(Error::Code::Config, "config.command: unknown command '" + c.command + "'");
  if (c.potential.family != "gaussian_well")
    throw Error(Error::Code::Config,
                "config.potential.family: unknown family '" + c.potential.family + "'");
  if (!(c.potential.a > 0)) throw Error(Error::Code::Config, "config.potential.a: must be > 0");
  if (!(c.potential.s > 0)) throw Error(Error::Code::Config, "config.potential.s: must be > 0");
  if (!(c.beta > 0)) throw Error(Error::Code::Config, "config.beta: must be > 0");
  for (double b : c.beta_list)
    if (!(b > 0)) throw Error(Error::Code::Config, "config.beta_list: entries must be > 0");
  if (c.n_particles < 2) throw Error(Error::Code::Config, "config.n_particles: must be >= 2");
  if (c.dim < 1) throw Error(Error::Code::Config, "config.dim: must be >= 1");
  if (!(c.delta > 0)) throw Error(Error::Code::Config, "config.delta: must be > 0");
  if (c.dt < 0) throw Error(Error::Code::Config, "config.dt: must be >= 0 (0 = auto)");
  if (!(c.t_max > 0)) throw Error(Error::Code::Config, "config.t_max: must be > 0");
  if (c.paths < 1) throw Error(Error::Code::Config, "config.paths: must be >= 1");
  if (c.jobs < 0) throw Error(Error::Code::Config, "config.jobs: must be >= 0");
  if (c.grid < 8) throw Error(Error::Code::Config, "config.grid: must be >= 8");
  if (c.m_eigen < 1) throw Error(Error::Code::Config, "config.m_eigen: must be >= 1");
  if (c.form != "weighted" && c.form != "witten" && c.form != "penalized")
    throw Error(Error::Code::Config, "config.form: expected weighted|witten|penalized");
  if (c.fv_particles < 2) throw Error(Error::Code::Config, "config.fv_particles: must be >= 2");
  if (!(c.fv_t_max > 0)) throw Error(Error::Code::Config, "config.fv_t_max: must be > 0");
  if (c.snapshots < 1) throw Error(Error::Code::Config, "config.snapshots: must be >= 1");
  if (c.bins < 2) throw Error(Error::Code::Config, "config.bins: must be >= 2");
  for (double t : c.t_list)
    if (!(t >= 0)) throw Error(Error::Code::Config, "config.t_list: entries must be >= 0");
  if (c.sweep_target != "spectrum" && c.sweep_target != "simulate")
    throw Error(Error::Code::Config, "config.sweep_target: expected spectrum|simulate");
  // the delta-admissibility condition needs the derived potential constants
  PairPotential pot = PairPotential::gaussian_well(c.potential.a, c.potential.s);
  if (!pot.delta_admissible(c.delta)) {
    std::ostringstream msg;
    msg << "config.delta: delta = " << c.delta
        << " violates the admissibility condition w(delta) + lambda delta^2/2 > 0 "
        << "(requires 0 < delta < delta' = " << pot.delta_prime() << ")";
    throw Error(Error::Code::Config, msg.str());
  }
}

} // namespace droplet
