#pragma once
#include <vector>

#include "droplet/qsd.hpp"
#include "droplet/sde.hpp"
#include "droplet/spectral.hpp"

namespace droplet {

// ---------- spectral mixture machinery (killed semigroup expansion) ----------

// density on the ball at time t started from nu (unconditioned; mass < 1):
// rho_t = sum_k e^{-lambda_k t} <e_k>_nu e_k u, using the first k_use pairs
VectorXd mixture_density(const SpectralResult& sp, const VectorXd& nu, double t,
                         int k_use);
// survival probability sum_k e^{-lambda_k t} <e_k>_nu <e_k>_p
double survival_probability(const SpectralResult& sp, const VectorXd& nu, double t,
                            int k_use);
// E[f(Y_t)] with f extended to the cemetery by f_star; k_use spectral terms
double mixture_expectation(const SpectralResult& sp, const VectorXd& nu,
                           const VectorXd& f_vals, double f_star, double t, int k_use);
// Cauchy-Schwarz tail bound using the last computed eigenvalue:
// e^{-lambda_m t} ||f - f_star||_{L2(p)} ||dnu/dp||_{L2(p)}
double mixture_truncation_bound(const SpectralResult& sp, const VectorXd& nu,
                                const VectorXd& f_vals, double f_star, double t);
// ||dnu/dp||_{L2(p)} by grid quadrature
double l2p_density_ratio(const SpectralResult& sp, const VectorXd& nu);
// overlap <e_k>_nu
double eigen_overlap(const SpectralResult& sp, const VectorXd& nu, int k);

// ---------- measures on the ball with a cemetery atom ----------

struct StarMeasure {
  std::vector<double> z;    // support in (-R, R), 1D
  std::vector<double> mass; // same length, nonnegative
  double star_mass = 0.0;
};

StarMeasure star_from_samples(const std::vector<double>& alive, int n_total);
StarMeasure star_from_grid(const SpectralResult& sp, const VectorXd& density,
                           double ball_mass);

// bin over [-R, R] plus one cemetery bin; masses, not densities
std::vector<double> star_bins(const StarMeasure& m, double R, int bins);
double tv_binned(const std::vector<double>& a, const std::vector<double>& b);

// exact 1-Wasserstein distance under the glued metric
// d(x,y) = min(|x-y|, (R-|x|) + (R-|y|)), d(x,star) = R - |x|:
// the space is isometric to a circle of circumference 2R
double w1_star(const StarMeasure& a, const StarMeasure& b, double R);

// ---------- theorem-scale helpers ----------

// TV bound 2 e^{-lambda_2 t} ||dnu/dp||; W1 bound sqrt(N) delta e^{-lambda_2 t} ||dnu/dp||
double tv_bound(const SpectralResult& sp, const VectorXd& nu, double t);
double w1_bound(const SpectralResult& sp, const VectorXd& nu, double t);

// two-term mixture alpha e^{-lambda_1 t} q + (1 - alpha e^{-lambda_1 t}) delta_star
StarMeasure two_term_mixture(const SpectralResult& sp, const VectorXd& nu, double t);

double t_window(double lambda1, double lambda2); // 1/sqrt(lambda1 lambda2)

// conditional law given survival at time t, from the spectral expansion
VectorXd conditioned_density(const SpectralResult& sp, const VectorXd& nu, double t,
                             int k_use);

// standard observables on the spectral grid
VectorXd obs_const_one(const SpectralResult& sp);
VectorXd obs_droplet(const SpectralResult& sp, int n_particles); // |z|^2 / N
VectorXd obs_bump(const SpectralResult& sp, double r0);          // exp(1-1/(1-(|z|/r0)^2))
VectorXd obs_boundary_dist(const SpectralResult& sp);            // R - |z|

} // namespace droplet
