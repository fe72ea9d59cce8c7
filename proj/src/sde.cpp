#include "droplet/sde.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace droplet {

double dt_max(double beta) {
  if (beta <= 0.0) throw Error(Error::Code::InvalidArg, "beta must be positive");
  return std::min(1e-2, 0.1 / beta);
}

double resolve_dt(const SimParams& p) {
  double ceiling = dt_max(p.beta);
  if (p.dt < 0.0)
    throw Error(Error::Code::InvalidArg, "dt must be positive (0 selects the default)");
  double dt = p.dt > 0.0 ? p.dt : ceiling;
  if (dt > ceiling && !p.allow_large_dt)
    throw Error(Error::Code::Config,
                "dt exceeds stability ceiling min(1e-2, 0.1/beta); pass allow_large_dt to override");
  if (!(dt > 0.0)) throw Error(Error::Code::InvalidArg, "dt must be positive");
  return dt;
}

VectorXd step_em(const PairPotential& pot, const Configuration& cfg, double dt,
                 double beta, const VectorXd& draws) {
  VectorXd g = grad_hamiltonian(pot, cfg);
  double sigma = std::sqrt(2.0 * dt / beta);
  return cfg.x - dt * g + sigma * draws;
}

VectorXd step_em_reduced(const PairPotential& pot, const ReducedBasis& basis,
                         const VectorXd& z, double dt, double beta,
                         const VectorXd& draws_reduced) {
  VectorXd g = grad_reduced(pot, basis, z);
  double sigma = std::sqrt(2.0 * dt / beta);
  return z - dt * g + sigma * draws_reduced;
}

namespace {

// advances one path; returns (exit step or -1), filling snapshots at step indices
struct PathRunner {
  const PairPotential& pot;
  const ReducedBasis& basis;
  double beta, dt, r_ball;
  int n_steps;
  Killing killing;

  // draws buffer holds n*d ambient normals per step
  template <class OnStep>
  void run(const VectorXd& z0, NormalStream& ns, OnStep&& on_step) const {
    const int amb = basis.ambient_dim();
    VectorXd z = z0;
    std::vector<double> buf(static_cast<std::size_t>(amb));
    VectorXd draws(amb);
    on_step(0, z, false);
    for (int k = 1; k <= n_steps; ++k) {
      ns.normals(static_cast<std::uint64_t>(k), buf.data(), buf.size());
      for (int i = 0; i < amb; ++i) draws[i] = buf[static_cast<std::size_t>(i)];
      VectorXd dr = basis.B.transpose() * draws;
      z = step_em_reduced(pot, basis, z, dt, beta, dr);
      bool exited = killing == Killing::BallExit && z.norm() >= r_ball;
      on_step(k, z, exited);
      if (exited) return;
    }
  }
};

} // namespace

KilledTrajectory simulate_killed(const PairPotential& pot, const ReducedBasis& basis,
                                 const SimParams& params, const VectorXd& z0,
                                 std::uint64_t path_index) {
  if (z0.size() != basis.reduced_dim())
    throw Error(Error::Code::InvalidArg, "initial state has wrong reduced dimension");
  double dt = resolve_dt(params);
  int n_steps = static_cast<int>(std::ceil(params.t_max / dt - 1e-12));
  double r_ball = std::sqrt(static_cast<double>(basis.n)) * params.delta;
  KilledTrajectory out;
  NormalStream ns(params.seed, stream_id(params.stream_tag, path_index, 0));
  PathRunner runner{pot, basis, params.beta, dt, r_ball, n_steps, params.killing};
  int thin = std::max(1, params.thin);
  runner.run(z0, ns, [&](int k, const VectorXd& z, bool exited) {
    if (exited) {
      out.exit_time = k * dt;
      out.killed = true;
      return;
    }
    if (k % thin == 0) {
      out.times.push_back(k * dt);
      out.states.push_back(z);
    }
  });
  return out;
}

ExitEnsemble run_killed_ensemble(const PairPotential& pot, const ReducedBasis& basis,
                                 const SimParams& params, const InitSampler& init,
                                 const std::vector<double>& snapshot_times) {
  double dt = resolve_dt(params);
  int n_steps = static_cast<int>(std::ceil(params.t_max / dt - 1e-12));
  double r_ball = std::sqrt(static_cast<double>(basis.n)) * params.delta;
  if (params.n_paths <= 0) throw Error(Error::Code::InvalidArg, "n_paths must be positive");

  ExitEnsemble ens;
  ens.n_paths = params.n_paths;
  ens.dt = dt;
  ens.snapshot_times = snapshot_times;
  // snap step indices (clamped to the horizon)
  std::vector<int> snap_steps;
  snap_steps.reserve(snapshot_times.size());
  for (double t : snapshot_times) {
    int k = static_cast<int>(std::llround(t / dt));
    if (k < 0 || k > n_steps)
      throw Error(Error::Code::InvalidArg, "snapshot time outside [0, t_max]");
    snap_steps.push_back(k);
  }
  for (std::size_t i = 0; i < snap_steps.size(); ++i)
    ens.snapshot_times[i] = snap_steps[i] * dt; // times as actually realized
  const double inf = std::numeric_limits<double>::infinity();
  ens.exit_times.assign(static_cast<std::size_t>(params.n_paths), inf);
  ens.snapshots.assign(snapshot_times.size(),
                       std::vector<VectorXd>(static_cast<std::size_t>(params.n_paths)));

  PathRunner runner{pot, basis, params.beta, dt, r_ball, n_steps, params.killing};

  // snapshot schedule sorted by step, remembering the requested order
  std::vector<std::pair<int, std::size_t>> sched;
  sched.reserve(snap_steps.size());
  for (std::size_t i = 0; i < snap_steps.size(); ++i) sched.emplace_back(snap_steps[i], i);
  std::sort(sched.begin(), sched.end());

  auto work_generic = [&](int path) {
    // stream 0 reserved for the dynamics; a separate stream feeds the initial draw
    NormalStream init_ns(params.seed, stream_id(params.stream_tag, static_cast<std::uint64_t>(path), 0xFE));
    VectorXd z0 = init(static_cast<std::uint64_t>(path), init_ns);
    NormalStream ns(params.seed, stream_id(params.stream_tag, static_cast<std::uint64_t>(path), 0));
    runner.run(z0, ns, [&](int k, const VectorXd& z, bool exited) {
      if (exited) {
        ens.exit_times[static_cast<std::size_t>(path)] = k * dt;
        return;
      }
      for (std::size_t si = 0; si < snap_steps.size(); ++si)
        if (snap_steps[si] == k)
          ens.snapshots[si][static_cast<std::size_t>(path)] = z;
    });
  };

  // scalar loop for the two-particle 1D chart; one projected normal per step,
  // drawn four steps at a time so each Philox block is fully consumed
  const bool fast1d = basis.reduced_dim() == 1;
  const double sq2 = std::sqrt(2.0);
  const double sigma = std::sqrt(2.0 * dt / params.beta);
  const bool kill = params.killing == Killing::BallExit;
  auto work_fast = [&](int path) {
    NormalStream init_ns(params.seed, stream_id(params.stream_tag, static_cast<std::uint64_t>(path), 0xFE));
    double z = init(static_cast<std::uint64_t>(path), init_ns)[0];
    NormalStream ns(params.seed, stream_id(params.stream_tag, static_cast<std::uint64_t>(path), 0));
    std::size_t si = 0;
    while (si < sched.size() && sched[si].first == 0) {
      ens.snapshots[sched[si].second][static_cast<std::size_t>(path)] =
          VectorXd::Constant(1, z);
      ++si;
    }
    double nbuf[4] = {0, 0, 0, 0};
    for (int k = 1; k <= n_steps; ++k) {
      int phase = (k - 1) & 3;
      if (phase == 0)
        ns.normals(static_cast<std::uint64_t>((k - 1) >> 2), nbuf, 4);
      double r = sq2 * std::abs(z);
      double drift = z == 0.0 ? 0.0 : -0.5 * sq2 * pot.eval(r).wp * (z > 0 ? 1.0 : -1.0);
      z += drift * dt + sigma * nbuf[phase];
      if (kill && std::abs(z) >= r_ball) {
        ens.exit_times[static_cast<std::size_t>(path)] = k * dt;
        return;
      }
      while (si < sched.size() && sched[si].first == k) {
        ens.snapshots[sched[si].second][static_cast<std::size_t>(path)] =
            VectorXd::Constant(1, z);
        ++si;
      }
    }
  };

  auto work = [&](int path) {
    if (fast1d)
      work_fast(path);
    else
      work_generic(path);
  };

  int jobs = params.jobs > 0 ? params.jobs
                             : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min(jobs, params.n_paths);
  if (jobs <= 1) {
    for (int p = 0; p < params.n_paths; ++p) work(p);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j)
      pool.emplace_back([&] {
        for (;;) {
          int p = next.fetch_add(1);
          if (p >= params.n_paths) return;
          work(p);
        }
      });
    for (auto& th : pool) th.join();
  }
  return ens;
}

std::vector<SurvivalPoint> survival_curve(const ExitEnsemble& ens, int n_points) {
  if (ens.n_paths == 0) return {};
  std::vector<double> exits;
  for (double t : ens.exit_times)
    if (std::isfinite(t)) exits.push_back(t);
  std::sort(exits.begin(), exits.end());
  double t_end = exits.empty() ? 1.0 : exits.back();
  std::vector<SurvivalPoint> curve;
  curve.reserve(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) {
    double t = t_end * (i + 1) / n_points;
    auto it = std::upper_bound(exits.begin(), exits.end(), t);
    int dead = static_cast<int>(it - exits.begin());
    int alive = ens.n_paths - dead;
    curve.push_back({t, static_cast<double>(alive) / ens.n_paths, alive});
  }
  return curve;
}

SurvivalFit estimate_lambda1(const std::vector<SurvivalPoint>& curve, double t0, double t1) {
  SurvivalFit fit;
  fit.t0 = t0;
  fit.t1 = t1;
  // weighted least squares of log S against t on points inside the window
  double sw = 0, st = 0, sy = 0, stt = 0, sty = 0;
  int used = 0;
  int max_survivors = 0;
  for (const auto& p : curve) max_survivors = std::max(max_survivors, p.survivors);
  for (const auto& p : curve) {
    if (p.t < t0 || p.t > t1 || p.survivors <= 0) continue;
    double y = std::log(p.s);
    double w = 1.0; // uniform weights; the curve is already time-binned
    sw += w; st += w * p.t; sy += w * y; stt += w * p.t * p.t; sty += w * p.t * y;
    ++used;
  }
  if (max_survivors == 0)
    throw Error(Error::Code::InsufficientData, "no survivors anywhere on the curve");
  if (used < 10) {
    // all-censored case: every path survived => only an upper bound is available
    bool any_exit = false;
    for (const auto& p : curve)
      if (p.s < 1.0) { any_exit = true; break; }
    if (!any_exit) {
      fit.censored = true;
      fit.lambda1 = 0.0;
      fit.points_used = 0;
      return fit;
    }
    throw Error(Error::Code::InsufficientData,
                "fewer than 10 usable survival points in the fit window");
  }
  double denom = sw * stt - st * st;
  if (std::abs(denom) < 1e-300)
    throw Error(Error::Code::Numeric, "degenerate survival fit window");
  double slope = (sw * sty - st * sy) / denom;
  double intercept = (sy - slope * st) / sw;
  fit.lambda1 = -slope;
  fit.alpha = std::exp(intercept);
  fit.points_used = used;
  return fit;
}

} // namespace droplet
