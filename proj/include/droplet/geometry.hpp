#pragma once
#include <Eigen/Dense>

#include "droplet/potential.hpp"

namespace droplet {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// particle configuration in ambient space; positions packed particle-major:
// x[i*d + a] = component a of particle i
struct Configuration {
  int n = 0, d = 0;
  VectorXd x;
};

// column-orthonormal chart of the zero-mean subspace: (n d) x ((n-1) d),
// Helmert vectors applied per spatial component
struct ReducedBasis {
  int n = 0, d = 0;
  MatrixXd B;
  int ambient_dim() const { return n * d; }
  int reduced_dim() const { return (n - 1) * d; }
};

// zero-mean state with both its ambient and reduced coordinates
struct ProjectedState {
  int n = 0, d = 0;
  VectorXd y;       // ambient, sums to zero per component
  VectorXd reduced; // coordinates in the ReducedBasis, |reduced| = |y|
};

ReducedBasis reduced_basis(int n, int d);

// subtract the particle mean componentwise and attach reduced coordinates
ProjectedState project(const ReducedBasis& basis, const VectorXd& x);
ProjectedState lift(const ReducedBasis& basis, const VectorXd& reduced);

// interaction energy H(x) = (1/2N) sum_{i,j} w(|x_i - x_j|)
double hamiltonian(const PairPotential& pot, const Configuration& cfg);
VectorXd grad_hamiltonian(const PairPotential& pot, const Configuration& cfg);
// full ambient Laplacian of H; equals the reduced-space Laplacian because the
// Hessian annihilates the translation directions
double laplacian_hamiltonian(const PairPotential& pot, const Configuration& cfg);

// reduced-space energy/gradient/Laplacian at reduced coordinates z
double energy_reduced(const PairPotential& pot, const ReducedBasis& basis, const VectorXd& z);
VectorXd grad_reduced(const PairPotential& pot, const ReducedBasis& basis, const VectorXd& z);
double laplacian_reduced(const PairPotential& pot, const ReducedBasis& basis, const VectorXd& z);

// (1/N) sum_i |y_i|^2; equals (1/(2N^2)) sum_{i,j} |x_i-x_j|^2 on projections
double droplet_statistic(const ProjectedState& st);
double droplet_statistic_pair_form(const Configuration& cfg);

struct HessianAtZero {
  MatrixXd full;        // (n d) x (n d)
  VectorXd spectrum;    // ascending
  MatrixXd reduced;     // ((n-1) d) square, via the basis
};
HessianAtZero hessian_at_zero(const PairPotential& pot, int n, int d);

struct ValleyDepth {
  double value = 0.0;   // min of the reduced energy over the sphere |z| = sqrt(N) delta
  bool converged = false;
  int starts = 0;
};
// multi-start projected gradient descent on the boundary sphere
ValleyDepth valley_depth(const PairPotential& pot, int n, int d, double delta,
                         int starts = 32, double tol = 1e-8);

struct FlowResult {
  std::vector<VectorXd> path; // reduced coordinates
  std::vector<double> energy;
  double t_end = 0.0;
};
// explicit Euler integration of dz/dt = -grad U(z); errors out if the energy
// ever increases (step-size instability)
FlowResult gradient_flow(const PairPotential& pot, const ReducedBasis& basis,
                         const VectorXd& z0, double dt, double t_max);

} // namespace droplet
