#pragma once
#include <functional>
#include <vector>

#include "droplet/sde.hpp"
#include "droplet/spectral.hpp"

namespace droplet {

// Fleming–Viot particle system: M copies of the killed dynamics; a particle
// hitting the boundary jumps onto a uniformly chosen survivor. The empirical
// law approximates the QSD and the kill rate approximates lambda_1.
struct FVParams {
  double beta = 8.0;
  double dt = 0.0;     // 0 -> dt_max(beta)
  double t_max = 20.0;
  double delta = 0.5;
  int m_particles = 1000;
  std::uint64_t seed = 1;
  double burn_in = -1.0; // <0 -> 0.2 t_max
  int n_snapshots = 8;   // pooled sampling times after burn-in
  bool disable_drift = false; // pure Brownian control case
  bool allow_large_dt = false;
  std::uint32_t stream_tag = 3;
};

struct FVResult {
  double kill_rate = 0.0; // kills per particle-time after burn-in
  long long kills = 0;    // counted after burn-in
  long long kills_total = 0;
  std::vector<double> snapshot_times;
  std::vector<VectorXd> pooled; // positions pooled over snapshots
  int m_particles = 0;
  double dt = 0.0, burn_in = 0.0;
};

FVResult run_fleming_viot(const PairPotential& pot, const ReducedBasis& basis,
                          const FVParams& p);

// ground-state profile of the pure Brownian motion killed at |z| = R (1D)
double brownian_ball_qsd(double z, double R);

// probability mass per bin over [lo, hi]; samples outside are dropped
std::vector<double> histogram(const std::vector<double>& xs, double lo, double hi,
                              int bins);
// binned total-variation distance between 1D samples and a density callback
double tv_samples_vs_density(const std::vector<double>& xs, int bins,
                             const std::function<double(double)>& density,
                             double lo, double hi);
// same against a spectral-grid density (nodes/cell from the result)
double tv_samples_vs_grid(const std::vector<double>& xs, int bins,
                          const SpectralResult& sp, const VectorXd& density);

// uniform density on the sub-ball |z| <= r0, evaluated on the spectral grid
VectorXd uniform_ball_density(const SpectralResult& sp, double r0);
// uniform density on |z - c| <= r0 (1D grids only)
VectorXd uniform_interval_density(const SpectralResult& sp, double center, double r0);

} // namespace droplet
