#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "droplet/spectral.hpp"

using namespace droplet;

namespace {

PairPotential flat_potential() { return PairPotential::gaussian_well(1e-12, 1.0); }

SpectralOptions base_opts(double beta, int m = 6, int grid = 2000) {
  SpectralOptions o;
  o.beta = beta;
  o.delta = 0.5;
  o.m = m;
  o.grid = grid;
  return o;
}

} // namespace

TEST_CASE("tridiagonal kernel reproduces the discrete laplacian spectrum") {
  // tridiag(-1, 2, -1)/h^2: eigenvalues (2 - 2 cos(k pi/(n+1)))/h^2, sin eigenvectors
  int n = 500;
  double h = 0.01;
  Tridiag T;
  T.diag.assign(n, 2.0L / (h * h));
  T.off.assign(n - 1, -1.0L / (h * h));
  const long double pi_l = 3.14159265358979323846264338327950288L;
  for (int k = 1; k <= 5; ++k) {
    long double sh = std::sin(k * pi_l / (2 * (n + 1)));
    long double exact = 4.0L * sh * sh / (h * h);
    long double got = tridiag_eigenvalue(T, k - 1);
    CHECK(std::abs(double(got - exact) / double(exact)) < 1e-13);

    auto v = tridiag_eigenvector(T, got);
    REQUIRE(static_cast<int>(v.size()) == n);
    // compare against the sine profile up to sign and normalization
    double dot = 0, nv = 0, ns = 0;
    std::vector<double> s(n);
    for (int i = 0; i < n; ++i) {
      s[i] = std::sin((i + 1) * k * M_PI / (n + 1));
      dot += double(v[i]) * s[i];
      nv += double(v[i]) * double(v[i]);
      ns += s[i] * s[i];
    }
    CHECK(std::abs(dot) / std::sqrt(nv * ns) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("flat interval spectrum matches both discrete and continuum dirichlet values") {
  auto pot = flat_potential();
  auto basis = reduced_basis(2, 1);
  auto opt = base_opts(4.0, 4, 1000);
  auto sp = solve_spectrum(pot, basis, opt);
  double R = std::sqrt(2.0) * 0.5;
  CHECK(sp.R == doctest::Approx(R).epsilon(1e-12));
  int nn = opt.grid - 1;
  CHECK(sp.nodes.rows() == nn);
  for (int k = 1; k <= 4; ++k) {
    double discrete = (2.0 - 2.0 * std::cos(k * M_PI / opt.grid)) / (opt.beta * sp.h * sp.h);
    double continuum = std::pow(k * M_PI / (2.0 * R), 2) / opt.beta;
    CHECK(sp.lambda[k - 1] == doctest::Approx(discrete).epsilon(1e-9));
    CHECK(sp.lambda[k - 1] == doctest::Approx(continuum).epsilon(1e-5 * k * k));
  }

  // QSD of Brownian motion in the interval is the normalized cosine
  for (int i = 0; i < nn; i += 37) {
    double z = sp.nodes(i, 0);
    double qs = M_PI / (4.0 * R) * std::cos(M_PI * z / (2.0 * R));
    CHECK(sp.qsd[i] == doctest::Approx(qs).epsilon(2e-4).scale(1.0));
  }

  // the flat-laplacian realization assembles the same operator here
  auto optw = opt;
  optw.form = Form::WittenFlat;
  auto spw = solve_spectrum(pot, basis, optw);
  for (int k = 0; k < 4; ++k)
    CHECK(spw.lambda[k] == doctest::Approx(sp.lambda[k]).epsilon(1e-10));
}

TEST_CASE("two-dimensional disc spectrum matches the bessel oracle") {
  const double j01 = 2.404825557695773, j11 = 3.831705970207512;
  auto pot = flat_potential();
  auto basis = reduced_basis(3, 1); // reduced space is a disc of radius sqrt(3)/2
  SpectralOptions opt = base_opts(4.0, 3, 160);
  auto sp = solve_spectrum(pot, basis, opt);
  REQUIRE(sp.dim == 2);
  double R = std::sqrt(3.0) * 0.5;
  CHECK(sp.lambda[0] == doctest::Approx(j01 * j01 / (opt.beta * R * R)).epsilon(0.02));
  CHECK(sp.lambda[1] == doctest::Approx(j11 * j11 / (opt.beta * R * R)).epsilon(0.02));
  // the first excited level of the disc is an exactly degenerate pair
  CHECK(sp.lambda[2] == doctest::Approx(sp.lambda[1]).epsilon(1e-6));
  // qsd integrates to one against the cell measure
  CHECK(sp.qsd.sum() * sp.cell == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("interacting spectrum at beta 8: invariants and frozen regression values") {
  auto pot = PairPotential::gaussian_well();
  auto basis = reduced_basis(2, 1);
  auto sp = solve_spectrum(pot, basis, base_opts(8.0));

  // regression anchors for the default configuration (grid 2000, divergence form)
  CHECK(sp.lambda[0] == doctest::Approx(0.16682446806477458).epsilon(1e-9));
  CHECK(sp.lambda[1] == doctest::Approx(2.59202250694689).epsilon(1e-9));
  CHECK(sp.lambda[2] == doctest::Approx(5.684626435019695).epsilon(1e-9));

  CHECK(sp.lambda[0] > 0.0);
  for (std::size_t k = 1; k < sp.lambda.size(); ++k) CHECK(sp.lambda[k] > sp.lambda[k - 1]);

  // stationary and quasi-stationary densities are probability densities
  CHECK(sp.u.sum() * sp.cell == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sp.qsd.sum() * sp.cell == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sp.qsd.minCoeff() > -1e-12);
  CHECK(sp.vectors.col(0).minCoeff() > -1e-10); // ground mode nonnegative

  // eigenvectors are orthonormal in L^2(p)
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k <= j; ++k) {
      double dot = (sp.vectors.col(j).array() * sp.vectors.col(k).array() * sp.u.array()).sum() *
                   sp.cell;
      CHECK(dot == doctest::Approx(j == k ? 1.0 : 0.0).epsilon(1e-8).scale(1.0));
    }

  // modes alternate parity in this symmetric potential: e1 even, e2 odd
  int nn = sp.nodes.rows();
  double odd1 = 0, even2 = 0;
  for (int i = 0; i < nn; ++i) {
    int mirror = nn - 1 - i;
    odd1 = std::max(odd1, std::abs(sp.vectors(i, 0) - sp.vectors(mirror, 0)));
    even2 = std::max(even2, std::abs(sp.vectors(i, 1) + sp.vectors(mirror, 1)));
  }
  CHECK(odd1 < 1e-7);
  CHECK(even2 < 1e-7);

  // alpha(p) = <e1>_p^2 is at most 1, with equality only if e1 is constant;
  // alpha(qsd) = 1 exactly by the normalization of e1
  CHECK(sp.alpha(sp.u) == doctest::Approx(sp.e1_mean_p * sp.e1_mean_p).epsilon(1e-12));
  CHECK(sp.alpha(sp.u) <= 1.0);
  CHECK(sp.alpha(sp.qsd) == doctest::Approx(1.0).epsilon(1e-10));

  // qsd_mean of the constant is one
  CHECK(sp.qsd_mean(VectorXd::Ones(nn)) == doctest::Approx(1.0).epsilon(1e-12));

  // the divergence and flat-laplacian realizations agree to discretization error
  auto optf = base_opts(8.0);
  optf.form = Form::WittenFlat;
  auto spf = solve_spectrum(pot, basis, optf);
  CHECK(spf.lambda[0] == doctest::Approx(sp.lambda[0]).epsilon(2e-3));
  CHECK(spf.lambda[1] == doctest::Approx(sp.lambda[1]).epsilon(2e-3));
}

TEST_CASE("grid refinement moves the low spectrum by less than a percent") {
  auto pot = PairPotential::gaussian_well();
  auto basis = reduced_basis(2, 1);
  auto a = solve_spectrum(pot, basis, base_opts(8.0, 2, 1000));
  auto b = solve_spectrum(pot, basis, base_opts(8.0, 2, 2000));
  CHECK(std::abs(a.lambda[0] - b.lambda[0]) / b.lambda[0] < 0.01);
  CHECK(std::abs(a.lambda[1] - b.lambda[1]) / b.lambda[1] < 0.01);
}

TEST_CASE("penalized realization relaxes the hard kill") {
  auto pot = PairPotential::gaussian_well();
  auto basis = reduced_basis(2, 1);
  auto hard = solve_spectrum(pot, basis, base_opts(20.0, 2));
  auto opt = base_opts(20.0, 2);
  opt.form = Form::Penalized;
  auto soft = solve_spectrum(pot, basis, opt);
  // soft killing only slows the exit; the gap eigenvalue stays within ~15%
  CHECK(soft.lambda[0] < hard.lambda[0]);
  CHECK(soft.lambda[0] > -1e-4); // numerically zero ground state is tolerated
  CHECK(std::abs(soft.lambda[1] - hard.lambda[1]) / hard.lambda[1] < 0.2);
}

TEST_CASE("harmonic levels are the lattice sums of the hessian frequencies") {
  auto pot = PairPotential::gaussian_well();
  double wpp0 = pot.eval(0.0).wpp;
  for (int n = 2; n <= 5; ++n)
    for (int d = 1; d <= 3; ++d) {
      int m = 8;
      auto lv = harmonic_levels(pot, n, d, m);
      REQUIRE(static_cast<int>(lv.size()) == m);
      CHECK(std::abs(lv[0]) < 1e-12);
      CHECK(lv[1] == doctest::Approx(wpp0).epsilon(1e-10));

      // brute force: all multi-index sums over (n-1)d frequencies wpp0
      int K = (n - 1) * d;
      std::vector<double> brute;
      // with equal frequencies the k-th sum is wpp0 * total quanta; enumerate
      // quanta counts with their multiplicity ordering
      for (int q = 0; q * K >= 0 && static_cast<int>(brute.size()) < m; ++q) {
        // multiplicity of level q is C(q + K - 1, K - 1)
        double mult = 1.0;
        for (int i = 1; i <= K - 1; ++i) mult *= double(q + i) / double(i);
        long count = std::lround(mult);
        for (long c = 0; c < count && static_cast<int>(brute.size()) < m; ++c)
          brute.push_back(q * wpp0);
      }
      for (int k = 0; k < m; ++k)
        CHECK(lv[k] == doctest::Approx(brute[k]).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("coarse grids are refused unless overridden") {
  auto pot = PairPotential::gaussian_well();
  auto basis = reduced_basis(2, 1);
  auto opt = base_opts(100.0, 2, 20); // h = 2R/20 well above beta^{-1/2}/4
  CHECK_THROWS_AS(solve_spectrum(pot, basis, opt), Error);
  opt.refuse_coarse = false;
  auto sp = solve_spectrum(pot, basis, opt);
  CHECK(sp.lambda.size() == 2);
}
