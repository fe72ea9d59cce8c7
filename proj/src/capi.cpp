#include "droplet.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "droplet/config.hpp"
#include "droplet/manifest.hpp"
#include "droplet/multiscale.hpp"
#include "droplet/runner.hpp"
#include "droplet/sde.hpp"
#include "droplet/spectral.hpp"

namespace {

thread_local std::string g_error;

dl_status code_of(const droplet::Error& e) {
  using C = droplet::Error::Code;
  switch (e.code) {
    case C::InvalidArg: return DL_EINVAL;
    case C::Config: return DL_ECONFIG;
    case C::Numeric: return DL_ENUMERIC;
    case C::Io: return DL_EIO;
    case C::InsufficientData: return DL_EDATA;
  }
  return DL_EUNKNOWN;
}

template <class F>
dl_status guarded(F&& fn) {
  try {
    fn();
    return DL_OK;
  } catch (const droplet::Error& e) {
    g_error = e.what();
    return code_of(e);
  } catch (const std::exception& e) {
    g_error = e.what();
    return DL_EUNKNOWN;
  } catch (...) {
    g_error = "unknown error";
    return DL_EUNKNOWN;
  }
}

dl_status fail_null() {
  g_error = "null pointer argument";
  return DL_EINVAL;
}

} // namespace

struct dl_potential {
  droplet::PairPotential pot;
};

struct dl_system {
  droplet::PairPotential pot;
  droplet::ReducedBasis basis;
  int n, d;
  double delta;
};

struct dl_spectrum {
  droplet::SpectralResult res;
  int n_particles;
};

extern "C" {

const char* dl_version(void) {
  static std::string v = droplet::library_version();
  return v.c_str();
}

const char* dl_last_error(void) { return g_error.c_str(); }

dl_status dl_potential_create_gaussian(double a, double s, dl_potential** out) {
  if (!out) return fail_null();
  *out = nullptr;
  return guarded([&] {
    *out = new dl_potential{droplet::PairPotential::gaussian_well(a, s)};
  });
}

dl_status dl_potential_eval(const dl_potential* p, double r, double* w, double* wp,
                            double* wpp) {
  if (!p || !w || !wp || !wpp) return fail_null();
  return guarded([&] {
    droplet::WEval e = p->pot.eval(r);
    *w = e.w;
    *wp = e.wp;
    *wpp = e.wpp;
  });
}

dl_status dl_potential_constants(const dl_potential* p, double* lambda,
                                 double* delta_prime, double* c_w) {
  if (!p || !lambda || !delta_prime || !c_w) return fail_null();
  return guarded([&] {
    *lambda = p->pot.lambda();
    *delta_prime = p->pot.delta_prime();
    *c_w = p->pot.c_w();
  });
}

void dl_potential_free(dl_potential* p) { delete p; }

dl_status dl_system_create(const dl_potential* p, int n_particles, int dim, double delta,
                           dl_system** out) {
  if (!p || !out) return fail_null();
  *out = nullptr;
  return guarded([&] {
    if (n_particles < 2)
      throw droplet::Error(droplet::Error::Code::InvalidArg, "need at least two particles");
    if (dim < 1) throw droplet::Error(droplet::Error::Code::InvalidArg, "dim must be >= 1");
    if (!p->pot.delta_admissible(delta))
      throw droplet::Error(droplet::Error::Code::Config,
                           "delta violates the admissibility condition (delta' threshold)");
    *out = new dl_system{p->pot, droplet::reduced_basis(n_particles, dim), n_particles, dim,
                         delta};
  });
}

dl_status dl_system_energy(const dl_system* s, const double* x, int len, double* out) {
  if (!s || !x || !out) return fail_null();
  return guarded([&] {
    if (len != s->n * s->d)
      throw droplet::Error(droplet::Error::Code::InvalidArg, "configuration length mismatch");
    droplet::Configuration cfg{s->n, s->d, droplet::VectorXd::Map(x, len)};
    *out = droplet::hamiltonian(s->pot, cfg);
  });
}

dl_status dl_system_grad(const dl_system* s, const double* x, int len, double* grad_out) {
  if (!s || !x || !grad_out) return fail_null();
  return guarded([&] {
    if (len != s->n * s->d)
      throw droplet::Error(droplet::Error::Code::InvalidArg, "configuration length mismatch");
    droplet::Configuration cfg{s->n, s->d, droplet::VectorXd::Map(x, len)};
    droplet::VectorXd g = droplet::grad_hamiltonian(s->pot, cfg);
    std::copy(g.data(), g.data() + len, grad_out);
  });
}

dl_status dl_system_valley_depth(const dl_system* s, double* out) {
  if (!s || !out) return fail_null();
  return guarded([&] {
    *out = droplet::valley_depth(s->pot, s->n, s->d, s->delta).value;
  });
}

void dl_system_free(dl_system* s) { delete s; }

dl_status dl_spectrum_solve(const dl_system* s, double beta, int grid, int m, int form,
                            dl_spectrum** out) {
  if (!s || !out) return fail_null();
  *out = nullptr;
  return guarded([&] {
    droplet::SpectralOptions opt;
    opt.beta = beta;
    opt.delta = s->delta;
    opt.m = m;
    opt.grid = grid;
    switch (form) {
      case 0: opt.form = droplet::Form::WeightedDivergence; break;
      case 1: opt.form = droplet::Form::WittenFlat; break;
      case 2: opt.form = droplet::Form::Penalized; break;
      default:
        throw droplet::Error(droplet::Error::Code::InvalidArg, "unknown form selector");
    }
    *out = new dl_spectrum{droplet::solve_spectrum(s->pot, s->basis, opt), s->n};
  });
}

dl_status dl_spectrum_count(const dl_spectrum* sp, int* m_out, int* n_nodes_out) {
  if (!sp || !m_out || !n_nodes_out) return fail_null();
  *m_out = static_cast<int>(sp->res.lambda.size());
  *n_nodes_out = static_cast<int>(sp->res.nodes.rows());
  return DL_OK;
}

dl_status dl_spectrum_eigenvalue(const dl_spectrum* sp, int k, double* out) {
  if (!sp || !out) return fail_null();
  if (k < 0 || k >= static_cast<int>(sp->res.lambda.size())) {
    g_error = "eigenvalue index out of range";
    return DL_EINVAL;
  }
  *out = sp->res.lambda[static_cast<std::size_t>(k)];
  return DL_OK;
}

dl_status dl_spectrum_node(const dl_spectrum* sp, int i, double* z, double* q, double* u) {
  if (!sp || !z || !q || !u) return fail_null();
  if (sp->res.dim != 1) {
    g_error = "node accessor is for 1D spectra";
    return DL_EINVAL;
  }
  if (i < 0 || i >= static_cast<int>(sp->res.nodes.rows())) {
    g_error = "node index out of range";
    return DL_EINVAL;
  }
  *z = sp->res.nodes(i, 0);
  *q = sp->res.qsd[i];
  *u = sp->res.u[i];
  return DL_OK;
}

dl_status dl_spectrum_droplet_moment(const dl_spectrum* sp, double* out) {
  if (!sp || !out) return fail_null();
  return guarded([&] {
    *out = sp->res.qsd_mean(droplet::obs_droplet(sp->res, sp->n_particles));
  });
}

void dl_spectrum_free(dl_spectrum* sp) { delete sp; }

dl_status dl_survival_rate(const dl_system* s, double beta, double dt, double t_max,
                           int n_paths, uint64_t seed, int jobs, double r0,
                           double* lambda1_out, int* n_exits_out) {
  if (!s || !lambda1_out || !n_exits_out) return fail_null();
  return guarded([&] {
    droplet::SimParams sim;
    sim.beta = beta;
    sim.dt = dt > 0 ? dt : 0.0;
    sim.t_max = t_max;
    sim.delta = s->delta;
    sim.n_paths = n_paths;
    sim.seed = seed;
    sim.jobs = jobs;
    const double R = std::sqrt(static_cast<double>(s->n)) * s->delta;
    double rr = r0 > 0 ? r0 : 0.5 * R;
    const int k = s->basis.reduced_dim();
    auto init = [k, rr](std::uint64_t, const droplet::NormalStream& ns) {
      droplet::VectorXd z(k);
      if (k == 1) {
        z[0] = (2.0 * ns.uniform(0, 0) - 1.0) * rr;
        return z;
      }
      std::vector<double> g(static_cast<std::size_t>(k));
      ns.normals(0, g.data(), static_cast<int>(g.size()));
      for (int a = 0; a < k; ++a) z[a] = g[static_cast<std::size_t>(a)];
      z /= z.norm();
      z *= rr * std::pow(ns.uniform(1, 0), 1.0 / k);
      return z;
    };
    droplet::ExitEnsemble ens = droplet::run_killed_ensemble(s->pot, s->basis, sim, init);
    std::vector<double> exits;
    for (double t : ens.exit_times)
      if (std::isfinite(t)) exits.push_back(t);
    *n_exits_out = static_cast<int>(exits.size());
    auto curve = droplet::survival_curve(ens, 200);
    std::sort(exits.begin(), exits.end());
    if (exits.empty())
      throw droplet::Error(droplet::Error::Code::InsufficientData, "no exits observed");
    double t1 = exits[static_cast<std::size_t>(0.98 * (exits.size() - 1))];
    droplet::SurvivalFit fit = droplet::estimate_lambda1(curve, 0.2 * t1, t1);
    *lambda1_out = fit.lambda1;
  });
}

dl_status dl_run_command_json(const char* config_json, char** report_json_out) {
  if (!config_json || !report_json_out) return fail_null();
  *report_json_out = nullptr;
  return guarded([&] {
    droplet::RunConfig cfg = droplet::config_from_json_text(config_json);
    droplet::RunResult res = droplet::run_command(cfg);
    char* buf = new char[res.report_json.size() + 1];
    std::memcpy(buf, res.report_json.c_str(), res.report_json.size() + 1);
    *report_json_out = buf;
  });
}

void dl_string_free(char* s) { delete[] s; }

} // extern "C"
