#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "droplet/geometry.hpp"
#include "droplet/potential.hpp"

using namespace droplet;

namespace {

Configuration random_config(int n, int d, std::mt19937& gen, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Configuration cfg{n, d, VectorXd(n * d)};
  for (int i = 0; i < n * d; ++i) cfg.x[i] = g(gen);
  return cfg;
}

} // namespace

TEST_CASE("reduced basis is orthonormal and kills translations") {
  for (auto [n, d] : {std::pair{2, 1}, {3, 2}, {5, 3}, {8, 3}}) {
    auto basis = reduced_basis(n, d);
    CHECK(basis.ambient_dim() == n * d);
    CHECK(basis.reduced_dim() == (n - 1) * d);
    MatrixXd gram = basis.B.transpose() * basis.B;
    CHECK((gram - MatrixXd::Identity(basis.reduced_dim(), basis.reduced_dim()))
              .cwiseAbs()
              .maxCoeff() < 1e-13);
    for (int a = 0; a < d; ++a) {
      VectorXd t = VectorXd::Zero(n * d);
      for (int i = 0; i < n; ++i) t[i * d + a] = 1.0;
      CHECK((basis.B.transpose() * t).cwiseAbs().maxCoeff() < 1e-13);
    }
  }
}

TEST_CASE("project and lift are inverse isometries on the zero-mean subspace") {
  std::mt19937 gen(11);
  for (auto [n, d] : {std::pair{2, 1}, {4, 2}, {6, 3}}) {
    auto basis = reduced_basis(n, d);
    auto cfg = random_config(n, d, gen);
    auto st = project(basis, cfg.x);
    for (int a = 0; a < d; ++a) {
      double s = 0;
      for (int i = 0; i < n; ++i) s += st.y[i * d + a];
      CHECK(std::abs(s) < 1e-12);
    }
    CHECK(st.reduced.norm() == doctest::Approx(st.y.norm()).epsilon(1e-13));
    auto back = lift(basis, st.reduced);
    CHECK((back.y - st.y).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((back.reduced - st.reduced).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("two-particle energy has a closed form") {
  auto pot = PairPotential::gaussian_well();
  std::mt19937 gen(3);
  for (int rep = 0; rep < 20; ++rep) {
    auto cfg = random_config(2, 1, gen);
    double r = std::abs(cfg.x[0] - cfg.x[1]);
    CHECK(hamiltonian(pot, cfg) == doctest::Approx(0.5 * pot.eval(r).w).epsilon(1e-14));
  }
  // translation invariance
  auto cfg = random_config(5, 2, gen);
  double h0 = hamiltonian(pot, cfg);
  for (int i = 0; i < 5; ++i) {
    cfg.x[i * 2] += 3.7;
    cfg.x[i * 2 + 1] -= 1.2;
  }
  CHECK(hamiltonian(pot, cfg) == doctest::Approx(h0).epsilon(1e-12));
}

TEST_CASE("gradient matches central differences on random configurations") {
  auto pot = PairPotential::gaussian_well();
  std::mt19937 gen(17);
  std::uniform_int_distribution<int> pick_n(2, 8), pick_d(1, 3);
  const double h = 1e-5;
  for (int rep = 0; rep < 100; ++rep) {
    int n = pick_n(gen), d = pick_d(gen);
    auto cfg = random_config(n, d, gen);
    VectorXd g = grad_hamiltonian(pot, cfg);
    for (int a = 0; a < d; ++a) { // gradient sums to zero per component
      double s = 0;
      for (int i = 0; i < n; ++i) s += g[i * d + a];
      CHECK(std::abs(s) < 1e-12);
    }
    double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
    for (int k = 0; k < n * d; ++k) {
      Configuration cp = cfg, cm = cfg;
      cp.x[k] += h;
      cm.x[k] -= h;
      double fd = (hamiltonian(pot, cp) - hamiltonian(pot, cm)) / (2 * h);
      CHECK(std::abs(g[k] - fd) / scale < 1e-6);
    }
  }
}

TEST_CASE("hessian at the origin has the harmonic spectrum") {
  auto pot = PairPotential::gaussian_well();
  double wpp0 = pot.eval(0.0).wpp;
  for (auto [n, d] : {std::pair{2, 1}, {3, 1}, {4, 2}, {5, 3}}) {
    auto hz = hessian_at_zero(pot, n, d);
    REQUIRE(hz.spectrum.size() == n * d);
    for (int i = 0; i < d; ++i) CHECK(std::abs(hz.spectrum[i]) < 1e-8);
    for (int i = d; i < n * d; ++i)
      CHECK(hz.spectrum[i] == doctest::Approx(wpp0).epsilon(1e-8));
    CHECK((hz.full - hz.full.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    int k = (n - 1) * d;
    CHECK((hz.reduced - wpp0 * MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("laplacian matches the finite-difference trace") {
  auto pot = PairPotential::gaussian_well();
  std::mt19937 gen(29);
  auto cfg = random_config(3, 2, gen, 0.6);
  double h = 1e-4, f0 = hamiltonian(pot, cfg), tr = 0.0;
  for (int k = 0; k < cfg.n * cfg.d; ++k) {
    Configuration cp = cfg, cm = cfg;
    cp.x[k] += h;
    cm.x[k] -= h;
    tr += (hamiltonian(pot, cp) - 2 * f0 + hamiltonian(pot, cm)) / (h * h);
  }
  CHECK(laplacian_hamiltonian(pot, cfg) == doctest::Approx(tr).epsilon(1e-5));
}

TEST_CASE("reduced energy, gradient, and laplacian agree with the ambient forms") {
  auto pot = PairPotential::gaussian_well();
  std::mt19937 gen(41);
  for (auto [n, d] : {std::pair{2, 1}, {3, 2}, {5, 1}}) {
    auto basis = reduced_basis(n, d);
    VectorXd z = VectorXd::Random(basis.reduced_dim());
    auto st = lift(basis, z);
    Configuration cfg{n, d, st.y};
    CHECK(energy_reduced(pot, basis, z) == doctest::Approx(hamiltonian(pot, cfg)).epsilon(1e-13));
    VectorXd gr = grad_reduced(pot, basis, z);
    VectorXd ga = basis.B.transpose() * grad_hamiltonian(pot, cfg);
    CHECK((gr - ga).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(laplacian_reduced(pot, basis, z) ==
          doctest::Approx(laplacian_hamiltonian(pot, cfg)).epsilon(1e-10));
    // chain rule against finite differences directly in reduced coordinates
    double h = 1e-5;
    for (int k = 0; k < z.size(); ++k) {
      VectorXd zp = z, zm = z;
      zp[k] += h;
      zm[k] -= h;
      double fd =
          (energy_reduced(pot, basis, zp) - energy_reduced(pot, basis, zm)) / (2 * h);
      CHECK(gr[k] == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("two-particle scalar drift identity used by the fast sampler") {
  // in the (n=2, d=1) chart U(z) = w(sqrt(2) |z|)/2, so U'(z) = (sqrt(2)/2) w'(sqrt(2) z)
  auto pot = PairPotential::gaussian_well();
  auto basis = reduced_basis(2, 1);
  const double sq2 = std::sqrt(2.0);
  for (double z : {0.05, 0.3, 0.7, -0.4, -1.1}) {
    VectorXd zv = VectorXd::Constant(1, z);
    double expect = 0.5 * sq2 * pot.eval(sq2 * std::abs(z)).wp * (z > 0 ? 1.0 : -1.0);
    CHECK(grad_reduced(pot, basis, zv)[0] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(energy_reduced(pot, basis, zv) ==
          doctest::Approx(0.5 * pot.eval(sq2 * z).w).epsilon(1e-13));
  }
}

TEST_CASE("droplet statistic equals its pairwise form") {
  auto basis = reduced_basis(6, 2);
  std::mt19937 gen(53);
  auto cfg = random_config(6, 2, gen);
  auto st = project(basis, cfg.x);
  double direct = droplet_statistic(st);
  double pair = droplet_statistic_pair_form(cfg);
  CHECK(direct == doctest::Approx(pair).epsilon(1e-12));
  CHECK(direct == doctest::Approx(st.reduced.squaredNorm() / 6.0).epsilon(1e-12));
  // translation of the raw configuration leaves it unchanged
  for (int i = 0; i < 6; ++i) cfg.x[i * 2] += 2.5;
  CHECK(droplet_statistic_pair_form(cfg) == doctest::Approx(pair).epsilon(1e-11));
}

TEST_CASE("valley depth: two particles have the closed form (1 - 1/e)/2") {
  auto pot = PairPotential::gaussian_well();
  // |z| = sqrt(2) * 0.5 on the sphere, U(z) = w(sqrt(2)|z|)/2 = w(1)/2 everywhere on it
  auto vd = valley_depth(pot, 2, 1, 0.5);
  CHECK(vd.converged);
  CHECK(vd.value == doctest::Approx(0.5 * (1.0 - std::exp(-1.0))).epsilon(1e-7));
  auto vd2 = valley_depth(pot, 2, 2, 0.5); // radial symmetry: same value in d = 2
  CHECK(vd2.value == doctest::Approx(vd.value).epsilon(1e-6));
}

TEST_CASE("valley depth is a minimum over the boundary sphere") {
  auto pot = PairPotential::gaussian_well();
  int n = 3, d = 1;
  double delta = 0.5, radius = std::sqrt(double(n)) * delta;
  auto vd = valley_depth(pot, n, d, delta);
  CHECK(vd.converged);
  CHECK(vd.value > 0.0);
  auto basis = reduced_basis(n, d);
  std::mt19937 gen(67);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 50; ++rep) {
    VectorXd z(basis.reduced_dim());
    for (int i = 0; i < z.size(); ++i) z[i] = g(gen);
    z *= radius / z.norm();
    CHECK(vd.value <= energy_reduced(pot, basis, z) + 1e-9);
  }
}

TEST_CASE("gradient flow descends to the origin") {
  auto pot = PairPotential::gaussian_well();
  auto basis = reduced_basis(3, 2);
  VectorXd z0 = VectorXd::Random(basis.reduced_dim()) * 0.4;
  auto flow = gradient_flow(pot, basis, z0, 1e-2, 40.0);
  REQUIRE(flow.path.size() > 1);
  REQUIRE(flow.energy.size() == flow.path.size());
  for (std::size_t i = 1; i < flow.energy.size(); ++i)
    CHECK(flow.energy[i] <= flow.energy[i - 1] + 1e-12);
  CHECK(flow.path.back().norm() < 1e-3);
}
