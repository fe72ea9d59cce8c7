#pragma once
#include <vector>

#include "droplet/geometry.hpp"

namespace droplet {

// which self-adjoint realization of the killed/penalized generator to assemble
enum class Form {
  WeightedDivergence, // similarity-symmetrized divergence form on the ball (reported)
  WittenFlat,         // flat Laplacian + (beta/4)|grad U|^2 - (1/2) Lap U, Dirichlet ball
  Penalized           // Witten potential + beta ((|z|-R)_+)^4 on an enlarged box
};

struct SpectralOptions {
  double beta = 1.0;
  double delta = 0.5;
  int m = 6;                 // eigenpairs requested
  int grid = 2000;           // cells across the ball diameter
  Form form = Form::WeightedDivergence;
  double pen_ext = 1.5;      // penalized: extension beyond R before the outer wall
  bool refuse_coarse = true; // enforce h <= beta^{-1/2}/4
};

struct SpectralResult {
  double beta = 0.0, delta = 0.0, R = 0.0, h = 0.0;
  int dim = 0;               // reduced dimension (1 or 2)
  double cell = 0.0;         // h^dim
  MatrixXd nodes;            // n_unknowns x dim interior nodes
  VectorXd U;                // reduced energy at the nodes
  std::vector<double> lambda;
  MatrixXd vectors;          // columns e_k, normalized in L^2(p), e_1 >= 0
  VectorXd u;                // stationary density e^{-beta U}/Z_h at the nodes
  VectorXd qsd;              // q = e_1 u / <e_1>_p, integrates to 1 against cell
  double e1_mean_p = 0.0;    // <e_1>_p = sum e_1 u cell

  // integral of f (given by node values) against the QSD
  double qsd_mean(const VectorXd& f_vals) const;
  // overlap factor for an initial density nu on the nodes:
  // (integral of e_1 d nu) * (integral of e_1 dp)
  double alpha(const VectorXd& nu_density) const;
};

// finite-difference eigensolve of the killed (or penalized) reduced generator;
// supports reduced dimension 1 and 2
SpectralResult solve_spectrum(const PairPotential& pot, const ReducedBasis& basis,
                              const SpectralOptions& opt);

// first m eigenvalue levels of the harmonic (small-temperature) approximation
// at the well bottom: sums n_i mu_i over the reduced Hessian spectrum mu
std::vector<double> harmonic_levels(const PairPotential& pot, int n, int d, int m);

// --- long-double symmetric tridiagonal kernel (exposed for tests) ---
struct Tridiag {
  std::vector<long double> diag;
  std::vector<long double> off; // off[i] couples i and i+1
};
// k-th smallest eigenvalue (0-based) by Sturm-count bisection
long double tridiag_eigenvalue(const Tridiag& T, int k);
// inverse iteration for the eigenvector at an isolated eigenvalue
std::vector<long double> tridiag_eigenvector(const Tridiag& T, long double lambda);

} // namespace droplet
