#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "droplet/sde.hpp"

using namespace droplet;

namespace {

// near-zero interaction: the killed process is Brownian motion in the ball,
// whose exit rate has a classical closed form
PairPotential flat_potential() { return PairPotential::gaussian_well(1e-12, 1.0); }

InitSampler dirac_origin(int dim) {
  return [dim](std::uint64_t, const NormalStream&) { return VectorXd::Zero(dim); };
}

} // namespace

TEST_CASE("dt ceiling and resolution") {
  CHECK(dt_max(1.0) == doctest::Approx(1e-2));
  CHECK(dt_max(8.0) == doctest::Approx(1e-2));
  CHECK(dt_max(20.0) == doctest::Approx(5e-3));
  CHECK(dt_max(100.0) == doctest::Approx(1e-3));
  CHECK_THROWS_AS(dt_max(0.0), Error);

  SimParams p;
  p.beta = 20.0;
  CHECK(resolve_dt(p) == doctest::Approx(5e-3));
  p.dt = 1e-3;
  CHECK(resolve_dt(p) == doctest::Approx(1e-3));
  p.dt = 2e-2;
  CHECK_THROWS_AS(resolve_dt(p), Error);
  p.allow_large_dt = true;
  CHECK(resolve_dt(p) == doctest::Approx(2e-2));
  p.dt = -1.0;
  p.allow_large_dt = false;
  CHECK_THROWS_AS(resolve_dt(p), Error);
}

TEST_CASE("single explicit steps have their closed forms") {
  auto pot = PairPotential::gaussian_well();
  Configuration cfg{2, 1, VectorXd(2)};
  cfg.x << 0.3, -0.1;
  double dt = 1e-3, beta = 4.0;

  VectorXd zero = VectorXd::Zero(2);
  VectorXd gd = step_em(pot, cfg, dt, beta, zero);
  VectorXd g = grad_hamiltonian(pot, cfg);
  CHECK((gd - (cfg.x - dt * g)).cwiseAbs().maxCoeff() < 1e-15);

  VectorXd draws(2);
  draws << 0.7, -1.2;
  VectorXd xk = step_em(pot, cfg, dt, beta, draws);
  CHECK((xk - (cfg.x - dt * g + std::sqrt(2.0 * dt / beta) * draws)).cwiseAbs().maxCoeff() <
        1e-15);

  // projecting the ambient step equals stepping the projected state
  auto basis = reduced_basis(2, 1);
  auto st = project(basis, cfg.x);
  VectorXd dr = basis.B.transpose() * draws;
  VectorXd zk = step_em_reduced(pot, basis, st.reduced, dt, beta, dr);
  auto stk = project(basis, xk);
  CHECK((zk - stk.reduced).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("brownian exit rate from the interval matches the dirichlet eigenvalue") {
  // two particles in 1D: the reduced ball is the interval [-R, R], and the
  // principal Dirichlet eigenvalue of -(1/beta) d^2/dz^2 is (1/beta)(pi/2R)^2
  auto pot = flat_potential();
  auto basis = reduced_basis(2, 1);
  SimParams p;
  p.beta = 4.0;
  p.delta = 0.5;
  p.dt = 1e-3;
  p.t_max = 4.0;
  p.n_paths = 4000;
  p.seed = 2024;
  double radius = std::sqrt(2.0) * p.delta;
  double lambda_exact = (1.0 / p.beta) * std::pow(M_PI / (2.0 * radius), 2);

  auto ens = run_killed_ensemble(pot, basis, p, dirac_origin(1));
  auto fit = estimate_lambda1(survival_curve(ens), 0.4, 2.0);
  CHECK(!fit.censored);
  CHECK(std::abs(fit.lambda1 - lambda_exact) / lambda_exact < 0.12);
}

TEST_CASE("brownian exit rate from the disc matches the bessel eigenvalue") {
  // three particles in 1D: reduced space is a 2D disc of radius sqrt(3) delta;
  // the principal rate is (1/beta) j01^2 / R^2 with j01 the first Bessel zero
  const double j01 = 2.404825557695773;
  auto pot = flat_potential();
  auto basis = reduced_basis(3, 1);
  SimParams p;
  p.beta = 4.0;
  p.delta = 0.5;
  p.dt = 1e-3;
  p.t_max = 3.0;
  p.n_paths = 2500;
  p.seed = 99;
  double radius = std::sqrt(3.0) * p.delta;
  double lambda_exact = j01 * j01 / (p.beta * radius * radius);

  auto ens = run_killed_ensemble(pot, basis, p, dirac_origin(2));
  auto fit = estimate_lambda1(survival_curve(ens), 0.25, 1.25);
  CHECK(!fit.censored);
  CHECK(std::abs(fit.lambda1 - lambda_exact) / lambda_exact < 0.12);
}

TEST_CASE("killed trajectory bookkeeping") {
  auto pot = PairPotential::gaussian_well();
  auto basis = reduced_basis(2, 1);
  SimParams p;
  p.beta = 5.0;
  p.delta = 0.5;
  p.dt = 5e-3;
  p.t_max = 2.0;
  p.thin = 4;
  double radius = std::sqrt(2.0) * p.delta;

  auto traj = simulate_killed(pot, basis, p, VectorXd::Zero(1), 3);
  REQUIRE(!traj.times.empty());
  CHECK(traj.times[0] == 0.0);
  for (std::size_t i = 1; i < traj.times.size(); ++i)
    CHECK(traj.times[i] - traj.times[i - 1] == doctest::Approx(p.thin * p.dt));
  for (const auto& z : traj.states) CHECK(z.norm() < radius);
  CHECK(traj.killed == traj.exit_time.has_value());
  if (traj.exit_time) CHECK(*traj.exit_time <= p.t_max + p.dt);

  // replay is deterministic
  auto traj2 = simulate_killed(pot, basis, p, VectorXd::Zero(1), 3);
  REQUIRE(traj2.states.size() == traj.states.size());
  for (std::size_t i = 0; i < traj.states.size(); ++i)
    CHECK(traj.states[i][0] == traj2.states[i][0]);

  CHECK_THROWS_AS(simulate_killed(pot, basis, p, VectorXd::Zero(2), 0), Error);
}

TEST_CASE("ensemble is deterministic and independent of the worker count") {
  auto pot = PairPotential::gaussian_well();
  for (int n : {2, 3}) { // n = 2 exercises the scalar fast path, n = 3 the generic one
    auto basis = reduced_basis(n, 1);
    SimParams p;
    p.beta = 6.0;
    p.delta = 0.5;
    p.dt = 5e-3;
    p.t_max = 1.0;
    p.n_paths = 60;
    p.seed = 7;
    std::vector<double> snaps{0.0, 0.5, 1.0};
    auto init = dirac_origin(basis.reduced_dim());

    p.jobs = 1;
    auto a = run_killed_ensemble(pot, basis, p, init, snaps);
    p.jobs = 4;
    auto b = run_killed_ensemble(pot, basis, p, init, snaps);
    REQUIRE(a.exit_times.size() == b.exit_times.size());
    for (std::size_t i = 0; i < a.exit_times.size(); ++i)
      CHECK(a.exit_times[i] == b.exit_times[i]);
    for (std::size_t s = 0; s < snaps.size(); ++s)
      for (int path = 0; path < p.n_paths; ++path) {
        const auto &za = a.snapshots[s][path], &zb = b.snapshots[s][path];
        REQUIRE(za.size() == zb.size());
        for (int i = 0; i < za.size(); ++i) CHECK(za[i] == zb[i]);
      }

    p.seed = 8;
    auto c = run_killed_ensemble(pot, basis, p, init, snaps);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.exit_times.size() && !any_diff; ++i)
      any_diff = a.exit_times[i] != c.exit_times[i];
    for (int path = 0; path < p.n_paths && !any_diff; ++path)
      if (a.snapshots[2][path].size() && c.snapshots[2][path].size())
        any_diff = a.snapshots[2][path][0] != c.snapshots[2][path][0];
    CHECK(any_diff);
  }
}

TEST_CASE("ensemble paths replay the single-path driver") {
  // same streams feed both drivers, so a constant initial condition makes the
  // ensemble reproduce simulate_killed path by path (generic integrator)
  auto pot = PairPotential::gaussian_well();
  auto basis = reduced_basis(3, 1);
  SimParams p;
  p.beta = 6.0;
  p.delta = 0.5;
  p.dt = 5e-3;
  p.t_max = 1.0;
  p.n_paths = 12;
  p.seed = 31;
  VectorXd z0(2);
  z0 << 0.1, -0.2;
  std::vector<double> snaps{0.25, 0.5, 1.0};
  auto ens = run_killed_ensemble(
      pot, basis, p, [&](std::uint64_t, const NormalStream&) { return z0; }, snaps);

  for (int path = 0; path < p.n_paths; ++path) {
    auto traj = simulate_killed(pot, basis, p, z0, path);
    if (std::isfinite(ens.exit_times[path])) {
      REQUIRE(traj.exit_time.has_value());
      CHECK(*traj.exit_time == ens.exit_times[path]);
    } else {
      CHECK(!traj.exit_time.has_value());
    }
    for (std::size_t s = 0; s < snaps.size(); ++s) {
      const auto& zs = ens.snapshots[s][path];
      if (zs.size() == 0) continue; // dead before this snapshot
      int k = static_cast<int>(std::llround(snaps[s] / p.dt));
      REQUIRE(k < static_cast<int>(traj.states.size()));
      CHECK(traj.times[k] == doctest::Approx(ens.snapshot_times[s]));
      for (int i = 0; i < zs.size(); ++i) CHECK(zs[i] == traj.states[k][i]);
    }
  }
}

TEST_CASE("initial sampler gets a per-path stream") {
  auto pot = flat_potential();
  auto basis = reduced_basis(2, 1);
  SimParams p;
  p.beta = 4.0;
  p.delta = 0.5;
  p.dt = 1e-2;
  p.t_max = 0.02;
  p.n_paths = 10;
  p.killing = Killing::None;
  std::vector<double> firsts;
  auto ens = run_killed_ensemble(
      pot, basis, p,
      [&](std::uint64_t, const NormalStream& ns) {
        double v;
        ns.normals(0, &v, 1);
        return VectorXd::Constant(1, 0.01 * v);
      },
      {0.0});
  for (int path = 0; path < p.n_paths; ++path)
    firsts.push_back(ens.snapshots[0][path][0]);
  int distinct = 0;
  for (std::size_t i = 1; i < firsts.size(); ++i)
    if (firsts[i] != firsts[0]) ++distinct;
  CHECK(distinct == 9);
}

TEST_CASE("survival curve counts survivors") {
  ExitEnsemble ens;
  ens.n_paths = 4;
  double inf = std::numeric_limits<double>::infinity();
  ens.exit_times = {0.5, 1.5, inf, inf};
  auto curve = survival_curve(ens, 3);
  REQUIRE(curve.size() == 3);
  CHECK(curve[0].t == doctest::Approx(0.5));
  CHECK(curve[0].s == doctest::Approx(0.75));
  CHECK(curve[0].survivors == 3);
  CHECK(curve[1].s == doctest::Approx(0.75));
  CHECK(curve[2].t == doctest::Approx(1.5));
  CHECK(curve[2].s == doctest::Approx(0.5));
  CHECK(curve[2].survivors == 2);
}

TEST_CASE("survival fit recovers exact exponential decay") {
  std::vector<SurvivalPoint> curve;
  double lam = 0.7, a = 0.8;
  for (int k = 1; k <= 100; ++k) {
    double t = 0.05 * k;
    double s = a * std::exp(-lam * t);
    curve.push_back({t, s, std::max(1, static_cast<int>(s * 10000))});
  }
  auto fit = estimate_lambda1(curve, 0.5, 4.0);
  CHECK(fit.lambda1 == doctest::Approx(lam).epsilon(1e-10));
  CHECK(fit.alpha == doctest::Approx(a).epsilon(1e-10));
  CHECK(fit.points_used > 50);
  CHECK(!fit.censored);
}

TEST_CASE("censored and degenerate fits are flagged") {
  // nothing ever exits: the window sees no usable points -> censored bound
  std::vector<SurvivalPoint> flat;
  for (int k = 1; k <= 50; ++k) flat.push_back({0.02 * k, 1.0, 100});
  auto fit = estimate_lambda1(flat, 2.0, 3.0);
  CHECK(fit.censored);
  CHECK(fit.lambda1 == 0.0);

  auto fit2 = estimate_lambda1(flat, 0.0, 1.0); // enough points, all s = 1
  CHECK(!fit2.censored);
  CHECK(fit2.lambda1 == doctest::Approx(0.0));

  std::vector<SurvivalPoint> dead;
  for (int k = 1; k <= 50; ++k) dead.push_back({0.02 * k, 0.0, 0});
  CHECK_THROWS_AS(estimate_lambda1(dead, 0.0, 1.0), Error);
}
