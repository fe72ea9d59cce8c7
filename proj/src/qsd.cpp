#include "droplet/qsd.hpp"

#include <algorithm>
#include <cmath>

namespace droplet {

FVResult run_fleming_viot(const PairPotential& pot, const ReducedBasis& basis,
                          const FVParams& p) {
  if (p.m_particles < 2)
    throw Error(Error::Code::InvalidArg, "Fleming-Viot needs at least two particles");
  SimParams sim;
  sim.beta = p.beta;
  sim.dt = p.dt;
  sim.allow_large_dt = p.allow_large_dt;
  double dt = resolve_dt(sim);
  double burn_in = p.burn_in >= 0 ? p.burn_in : 0.2 * p.t_max;
  if (burn_in >= p.t_max)
    throw Error(Error::Code::InvalidArg, "burn-in must be smaller than t_max");
  const int n_steps = static_cast<int>(std::ceil(p.t_max / dt - 1e-12));
  const int k = basis.reduced_dim();
  const int amb = basis.ambient_dim();
  const double R = std::sqrt(static_cast<double>(basis.n)) * p.delta;
  const double sigma = std::sqrt(2.0 * dt / p.beta);

  // per-particle dynamics streams; one shared stream orders the resampling
  std::vector<NormalStream> ns;
  ns.reserve(static_cast<std::size_t>(p.m_particles));
  for (int i = 0; i < p.m_particles; ++i)
    ns.emplace_back(p.seed, stream_id(p.stream_tag, static_cast<std::uint64_t>(i), 0));
  NormalStream us(p.seed, stream_id(p.stream_tag, 0xFFFFFFFFull, 0xFD));

  // start uniformly on the sub-ball of radius R/2
  std::vector<VectorXd> z(static_cast<std::size_t>(p.m_particles), VectorXd::Zero(k));
  for (int i = 0; i < p.m_particles; ++i) {
    NormalStream is(p.seed, stream_id(p.stream_tag, static_cast<std::uint64_t>(i), 0xFE));
    if (k == 1) {
      z[static_cast<std::size_t>(i)][0] = (2.0 * is.uniform(0, 0) - 1.0) * 0.5 * R;
    } else {
      std::vector<double> g(static_cast<std::size_t>(k));
      is.normals(0, g.data(), g.size());
      VectorXd dir(k);
      for (int a = 0; a < k; ++a) dir[a] = g[static_cast<std::size_t>(a)];
      dir /= dir.norm();
      double r = 0.5 * R * std::pow(is.uniform(1, 0), 1.0 / k);
      z[static_cast<std::size_t>(i)] = r * dir;
    }
  }

  // snapshot schedule
  std::vector<int> snap_steps;
  std::vector<double> snap_times;
  for (int s = 0; s < p.n_snapshots; ++s) {
    double t = burn_in + (s + 1) * (p.t_max - burn_in) / p.n_snapshots;
    int st = std::min(n_steps, static_cast<int>(std::llround(t / dt)));
    snap_steps.push_back(st);
    snap_times.push_back(st * dt);
  }

  FVResult out;
  out.m_particles = p.m_particles;
  out.dt = dt;
  out.burn_in = burn_in;
  out.snapshot_times = snap_times;

  std::vector<double> gbuf(static_cast<std::size_t>(amb));
  VectorXd draws(amb);
  std::vector<int> exited, alive;
  exited.reserve(static_cast<std::size_t>(p.m_particles));
  alive.reserve(static_cast<std::size_t>(p.m_particles));

  for (int step = 1; step <= n_steps; ++step) {
    exited.clear();
    alive.clear();
    for (int i = 0; i < p.m_particles; ++i) {
      VectorXd& zi = z[static_cast<std::size_t>(i)];
      ns[static_cast<std::size_t>(i)].normals(static_cast<std::uint64_t>(step), gbuf.data(),
                                              gbuf.size());
      for (int a = 0; a < amb; ++a) draws[a] = gbuf[static_cast<std::size_t>(a)];
      VectorXd dr = basis.B.transpose() * draws;
      if (p.disable_drift)
        zi += sigma * dr;
      else
        zi = step_em_reduced(pot, basis, zi, dt, p.beta, dr);
      if (zi.norm() >= R)
        exited.push_back(i);
      else
        alive.push_back(i);
    }
    if (alive.empty())
      throw Error(Error::Code::Numeric, "all Fleming-Viot particles exited in one step");
    double t = step * dt;
    std::uint64_t slot = 0;
    for (int i : exited) {
      double u = us.uniform(static_cast<std::uint64_t>(step), slot++);
      int j = alive[std::min(static_cast<std::size_t>(u * alive.size()), alive.size() - 1)];
      z[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(j)];
      ++out.kills_total;
      if (t > burn_in) ++out.kills;
    }
    for (std::size_t si = 0; si < snap_steps.size(); ++si)
      if (snap_steps[si] == step)
        for (int i = 0; i < p.m_particles; ++i)
          out.pooled.push_back(z[static_cast<std::size_t>(i)]);
  }
  double window = p.t_max - burn_in;
  out.kill_rate = static_cast<double>(out.kills) / (static_cast<double>(p.m_particles) * window);
  return out;
}

double brownian_ball_qsd(double z, double R) {
  if (std::abs(z) >= R) return 0.0;
  const double pi = 3.14159265358979323846;
  return (pi / (4.0 * R)) * std::cos(pi * z / (2.0 * R));
}

std::vector<double> histogram(const std::vector<double>& xs, double lo, double hi,
                              int bins) {
  if (bins < 1 || !(hi > lo)) throw Error(Error::Code::InvalidArg, "bad histogram spec");
  std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
  double width = (hi - lo) / bins;
  std::size_t used = 0;
  for (double x : xs) {
    if (x < lo || x >= hi) continue;
    int b = std::min(bins - 1, static_cast<int>((x - lo) / width));
    h[static_cast<std::size_t>(b)] += 1.0;
    ++used;
  }
  if (used == 0) throw Error(Error::Code::InsufficientData, "no samples inside histogram range");
  for (double& v : h) v /= static_cast<double>(xs.size());
  return h;
}

double tv_samples_vs_density(const std::vector<double>& xs, int bins,
                             const std::function<double(double)>& density,
                             double lo, double hi) {
  std::vector<double> emp = histogram(xs, lo, hi, bins);
  double width = (hi - lo) / bins;
  double tv = 0.0;
  for (int b = 0; b < bins; ++b) {
    // 16-point midpoint quadrature of the target density over the bin
    double mass = 0.0;
    for (int q = 0; q < 16; ++q)
      mass += density(lo + (b + (q + 0.5) / 16.0) * width) * width / 16.0;
    tv += std::abs(emp[static_cast<std::size_t>(b)] - mass);
  }
  return 0.5 * tv;
}

double tv_samples_vs_grid(const std::vector<double>& xs, int bins,
                          const SpectralResult& sp, const VectorXd& density) {
  if (sp.dim != 1)
    throw Error(Error::Code::InvalidArg, "grid TV comparison implemented for 1D only");
  if (density.size() != sp.nodes.rows())
    throw Error(Error::Code::InvalidArg, "density has wrong size");
  double lo = -sp.R, hi = sp.R;
  std::vector<double> emp = histogram(xs, lo, hi, bins);
  std::vector<double> tgt(static_cast<std::size_t>(bins), 0.0);
  double width = (hi - lo) / bins;
  for (int i = 0; i < sp.nodes.rows(); ++i) {
    double zi = sp.nodes(i, 0);
    if (zi < lo || zi >= hi) continue;
    int b = std::min(bins - 1, static_cast<int>((zi - lo) / width));
    tgt[static_cast<std::size_t>(b)] += density[i] * sp.cell;
  }
  double tv = 0.0;
  for (int b = 0; b < bins; ++b)
    tv += std::abs(emp[static_cast<std::size_t>(b)] - tgt[static_cast<std::size_t>(b)]);
  return 0.5 * tv;
}

VectorXd uniform_ball_density(const SpectralResult& sp, double r0) {
  if (!(r0 > 0) || r0 > sp.R)
    throw Error(Error::Code::InvalidArg, "sub-ball radius must lie in (0, R]");
  const int nn = static_cast<int>(sp.nodes.rows());
  VectorXd nu = VectorXd::Zero(nn);
  double mass = 0.0;
  for (int i = 0; i < nn; ++i) {
    if (sp.nodes.row(i).norm() <= r0) {
      nu[i] = 1.0;
      mass += sp.cell;
    }
  }
  if (mass == 0.0)
    throw Error(Error::Code::InsufficientData, "no grid nodes inside the sub-ball");
  return nu / mass;
}

VectorXd uniform_interval_density(const SpectralResult& sp, double center, double r0) {
  if (sp.dim != 1)
    throw Error(Error::Code::InvalidArg, "interval density is 1D only");
  const int nn = static_cast<int>(sp.nodes.rows());
  VectorXd nu = VectorXd::Zero(nn);
  double mass = 0.0;
  for (int i = 0; i < nn; ++i) {
    if (std::abs(sp.nodes(i, 0) - center) <= r0) {
      nu[i] = 1.0;
      mass += sp.cell;
    }
  }
  if (mass == 0.0)
    throw Error(Error::Code::InsufficientData, "no grid nodes inside the interval");
  return nu / mass;
}

} // namespace droplet
