#pragma once
#include <functional>
#include <optional>
#include <vector>

#include "droplet/geometry.hpp"
#include "droplet/rng.hpp"

namespace droplet {

enum class Killing { None, BallExit };

struct SimParams {
  double beta = 1.0;
  double dt = 0.0;      // 0 -> dt_max(beta)
  double t_max = 10.0;
  double delta = 0.5;
  int n_paths = 1000;
  std::uint64_t seed = 1;
  Killing killing = Killing::BallExit;
  int thin = 1;             // store every thin-th state
  bool allow_large_dt = false;
  int jobs = 0;             // 0 -> hardware concurrency
  std::uint32_t stream_tag = 1; // separates RNG domains between run kinds
};

// stability ceiling for the explicit step at inverse temperature beta
double dt_max(double beta);
// resolve params.dt (0 -> default) and enforce the ceiling unless overridden
double resolve_dt(const SimParams& p);

// one explicit step of the full system: x' = x - grad H(x) dt + sqrt(2 dt/beta) xi
VectorXd step_em(const PairPotential& pot, const Configuration& cfg, double dt,
                 double beta, const VectorXd& draws);
// same step in reduced coordinates; draws_reduced = B^T (ambient draws)
VectorXd step_em_reduced(const PairPotential& pot, const ReducedBasis& basis,
                         const VectorXd& z, double dt, double beta,
                         const VectorXd& draws_reduced);

struct KilledTrajectory {
  std::vector<double> times;
  std::vector<VectorXd> states; // reduced coordinates, thinned
  std::optional<double> exit_time;
  bool killed = false;
};

// run the reduced process from z0 until the droplet ball is left or t_max;
// noise is the projected image of per-particle ambient draws
KilledTrajectory simulate_killed(const PairPotential& pot, const ReducedBasis& basis,
                                 const SimParams& params, const VectorXd& z0,
                                 std::uint64_t path_index = 0);

// ensemble of killed runs with per-(path, particle) streams; snapshots of the
// surviving states are recorded at the requested times
struct ExitEnsemble {
  std::vector<double> exit_times;               // infinity if never exited
  std::vector<double> snapshot_times;
  std::vector<std::vector<VectorXd>> snapshots; // [time][path], empty vec if dead
  int n_paths = 0;
  double dt = 0.0;
};

using InitSampler = std::function<VectorXd(std::uint64_t path, const NormalStream& events)>;

ExitEnsemble run_killed_ensemble(const PairPotential& pot, const ReducedBasis& basis,
                                 const SimParams& params, const InitSampler& init,
                                 const std::vector<double>& snapshot_times = {});

struct SurvivalPoint { double t, s; int survivors; };
std::vector<SurvivalPoint> survival_curve(const ExitEnsemble& ens, int n_points = 200);

struct SurvivalFit {
  double lambda1 = 0.0;
  double alpha = 1.0;
  double t0 = 0.0, t1 = 0.0;
  int points_used = 0;
  bool censored = false; // no exits observed; lambda1 is an upper bound
};
// least squares on log S(t) over [t0, t1]
SurvivalFit estimate_lambda1(const std::vector<SurvivalPoint>& curve, double t0, double t1);

} // namespace droplet
