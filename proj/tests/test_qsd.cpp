#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "droplet/qsd.hpp"

using namespace droplet;

TEST_CASE("brownian ball profile is the normalized cosine") {
  double R = 0.9;
  CHECK(brownian_ball_qsd(0.0, R) == doctest::Approx(M_PI / (4.0 * R)).epsilon(1e-14));
  CHECK(brownian_ball_qsd(R, R) == 0.0);
  CHECK(brownian_ball_qsd(-R - 0.1, R) == 0.0);
  CHECK(brownian_ball_qsd(0.3, R) == doctest::Approx(brownian_ball_qsd(-0.3, R)).epsilon(1e-14));
  // integrates to one
  int n = 20000;
  double mass = 0.0, h = 2 * R / n;
  for (int i = 0; i < n; ++i) mass += brownian_ball_qsd(-R + (i + 0.5) * h, R) * h;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("histogram masses and edge conventions") {
  std::vector<double> xs{0.1, 0.1, 0.3, 0.5, 0.7, 2.0, -1.0};
  auto h = histogram(xs, 0.0, 1.0, 5);
  REQUIRE(h.size() == 5);
  // out-of-range samples count in the denominator but land in no bin
  CHECK(h[0] == doctest::Approx(2.0 / 7.0));
  CHECK(h[1] == doctest::Approx(1.0 / 7.0));
  CHECK(h[2] == doctest::Approx(1.0 / 7.0));
  CHECK(h[3] == doctest::Approx(1.0 / 7.0));
  CHECK(h[4] == doctest::Approx(0.0));
  double total = 0;
  for (double v : h) total += v;
  CHECK(total == doctest::Approx(5.0 / 7.0));

  CHECK_THROWS_AS(histogram(xs, 1.0, 0.0, 5), Error);
  CHECK_THROWS_AS(histogram(xs, 0.0, 1.0, 0), Error);
  CHECK_THROWS_AS(histogram(std::vector<double>{9.0}, 0.0, 1.0, 5), Error);
}

TEST_CASE("binned TV against a density") {
  double R = 0.7;
  // quantile-stratified samples of the cosine profile: F^{-1}(u) = (2R/pi) asin(2u-1)
  int n = 20000;
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) {
    double u = (i + 0.5) / n;
    xs[i] = (2.0 * R / M_PI) * std::asin(2.0 * u - 1.0);
  }
  double tv = tv_samples_vs_density(
      xs, 40, [R](double z) { return brownian_ball_qsd(z, R); }, -R, R);
  CHECK(tv < 0.01);

  // disjoint supports give TV close to one
  std::vector<double> left(n);
  for (int i = 0; i < n; ++i) left[i] = -R + 0.4 * R * (i + 0.5) / n;
  double tv1 = tv_samples_vs_density(
      left, 40, [R](double z) { return z > 0.2 * R ? 1.0 / (0.8 * R) : 0.0; }, -R, R);
  CHECK(tv1 > 0.98);
}

TEST_CASE("grid densities normalize on the spectral mesh") {
  auto pot = PairPotential::gaussian_well();
  auto basis = reduced_basis(2, 1);
  SpectralOptions opt;
  opt.beta = 8.0;
  opt.m = 2;
  opt.grid = 1000;
  auto sp = solve_spectrum(pot, basis, opt);

  auto nu = uniform_ball_density(sp, 0.5 * sp.R);
  CHECK(nu.sum() * sp.cell == doctest::Approx(1.0).epsilon(1e-12));
  for (int i = 0; i < sp.nodes.rows(); ++i)
    if (std::abs(sp.nodes(i, 0)) > 0.5 * sp.R + sp.h) CHECK(nu[i] == 0.0);

  auto nu2 = uniform_interval_density(sp, 0.2, 0.1);
  CHECK(nu2.sum() * sp.cell == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(uniform_ball_density(sp, 0.0), Error);
  CHECK_THROWS_AS(uniform_ball_density(sp, 2.0 * sp.R), Error);

  // TV between exact grid samples of a density and the density itself is small
  std::vector<double> xs;
  for (int i = 0; i < sp.nodes.rows(); ++i) {
    int copies = static_cast<int>(std::lround(sp.qsd[i] * sp.cell * 200000));
    for (int c = 0; c < copies; ++c) xs.push_back(sp.nodes(i, 0));
  }
  double tv = tv_samples_vs_grid(xs, 30, sp, sp.qsd);
  CHECK(tv < 0.01);
}

TEST_CASE("fleming-viot without drift settles on the brownian profile") {
  auto pot = PairPotential::gaussian_well(); // ignored by the control case
  auto basis = reduced_basis(2, 1);
  FVParams p;
  p.beta = 8.0;
  p.dt = 5e-3;
  p.t_max = 15.0;
  p.m_particles = 2000;
  p.seed = 5;
  p.disable_drift = true;
  auto fv = run_fleming_viot(pot, basis, p);
  double R = std::sqrt(2.0) * p.delta;
  std::vector<double> xs;
  xs.reserve(fv.pooled.size());
  for (const auto& z : fv.pooled) xs.push_back(z[0]);
  double tv = tv_samples_vs_density(
      xs, 30, [R](double z) { return brownian_ball_qsd(z, R); }, -R, R);
  CHECK(tv < 0.05);

  // kill rate approximates the Dirichlet eigenvalue (pi/2R)^2 / beta
  double lam = std::pow(M_PI / (2.0 * R), 2) / p.beta;
  CHECK(std::abs(fv.kill_rate - lam) / lam < 0.25);
}

TEST_CASE("fleming-viot with drift tracks the spectral kill rate") {
  auto pot = PairPotential::gaussian_well();
  auto basis = reduced_basis(2, 1);
  FVParams p;
  p.beta = 8.0;
  p.dt = 5e-3;
  p.t_max = 12.0;
  p.m_particles = 1200;
  p.seed = 11;
  auto fv = run_fleming_viot(pot, basis, p);

  SpectralOptions opt;
  opt.beta = 8.0;
  opt.m = 2;
  auto sp = solve_spectrum(pot, basis, opt);
  CHECK(std::abs(fv.kill_rate - sp.lambda[0]) / sp.lambda[0] < 0.25);

  std::vector<double> xs;
  for (const auto& z : fv.pooled) xs.push_back(z[0]);
  CHECK(tv_samples_vs_grid(xs, 30, sp, sp.qsd) < 0.08);
}

TEST_CASE("fleming-viot bookkeeping and determinism") {
  auto pot = PairPotential::gaussian_well();
  auto basis = reduced_basis(2, 1);
  FVParams p;
  p.beta = 6.0;
  p.dt = 5e-3;
  p.t_max = 3.0;
  p.m_particles = 200;
  p.seed = 21;
  p.n_snapshots = 4;
  auto a = run_fleming_viot(pot, basis, p);
  CHECK(a.m_particles == 200);
  CHECK(a.burn_in == doctest::Approx(0.6));
  REQUIRE(a.snapshot_times.size() == 4);
  for (double t : a.snapshot_times) CHECK(t > a.burn_in);
  CHECK(a.snapshot_times.back() == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(a.pooled.size() == static_cast<std::size_t>(4 * 200));
  CHECK(a.kills <= a.kills_total);
  CHECK(a.kill_rate == doctest::Approx(double(a.kills) / (200 * (3.0 - 0.6))));

  auto b = run_fleming_viot(pot, basis, p);
  CHECK(b.kills_total == a.kills_total);
  REQUIRE(b.pooled.size() == a.pooled.size());
  for (std::size_t i = 0; i < a.pooled.size(); ++i)
    CHECK(a.pooled[i][0] == b.pooled[i][0]);

  p.seed = 22;
  auto c = run_fleming_viot(pot, basis, p);
  bool differs = c.kills_total != a.kills_total;
  for (std::size_t i = 0; i < a.pooled.size() && !differs; ++i)
    differs = a.pooled[i][0] != c.pooled[i][0];
  CHECK(differs);

  // explicit burn-in is honored
  p.seed = 21;
  p.burn_in = 2.0;
  auto d = run_fleming_viot(pot, basis, p);
  CHECK(d.burn_in == 2.0);
  CHECK(d.kills_total == a.kills_total); // same trajectories, same total kills
  CHECK(d.kills <= a.kills);

  p.burn_in = 5.0; // past t_max
  CHECK_THROWS_AS(run_fleming_viot(pot, basis, p), Error);
  p.burn_in = -1.0;
  p.m_particles = 1;
  CHECK_THROWS_AS(run_fleming_viot(pot, basis, p), Error);
}
