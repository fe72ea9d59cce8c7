#include "droplet/geometry.hpp"

#include <cmath>
#include <limits>

#include "droplet/rng.hpp"

namespace droplet {

namespace {

void check_cfg(const Configuration& cfg) {
  if (cfg.n < 2 || cfg.d < 1)
    throw Error(Error::Code::InvalidArg, "configuration needs n>=2 particles and d>=1");
  if (cfg.x.size() != cfg.n * cfg.d)
    throw Error(Error::Code::InvalidArg, "configuration length != n*d");
  if (!cfg.x.allFinite())
    throw Error(Error::Code::InvalidArg, "configuration has non-finite entries");
}

} // namespace

ReducedBasis reduced_basis(int n, int d) {
  if (n < 2 || d < 1) throw Error(Error::Code::InvalidArg, "basis needs n>=2, d>=1");
  ReducedBasis basis;
  basis.n = n;
  basis.d = d;
  basis.B = MatrixXd::Zero(n * d, (n - 1) * d);
  // Helmert vector j (1-based): 1/sqrt(j(j+1)) on particles 0..j-1, -j/sqrt(j(j+1)) on particle j
  for (int j = 1; j < n; ++j) {
    double norm = 1.0 / std::sqrt(double(j) * (j + 1));
    for (int a = 0; a < d; ++a) {
      int col = (j - 1) * d + a;
      for (int i = 0; i < j; ++i) basis.B(i * d + a, col) = norm;
      basis.B(j * d + a, col) = -double(j) * norm;
    }
  }
  return basis;
}

ProjectedState project(const ReducedBasis& basis, const VectorXd& x) {
  if (x.size() != basis.ambient_dim())
    throw Error(Error::Code::InvalidArg, "project: length mismatch");
  ProjectedState st;
  st.n = basis.n;
  st.d = basis.d;
  st.y = x;
  for (int a = 0; a < basis.d; ++a) {
    double mean = 0.0;
    for (int i = 0; i < basis.n; ++i) mean += x[i * basis.d + a];
    mean /= basis.n;
    for (int i = 0; i < basis.n; ++i) st.y[i * basis.d + a] -= mean;
  }
  st.reduced = basis.B.transpose() * st.y;
  return st;
}

ProjectedState lift(const ReducedBasis& basis, const VectorXd& reduced) {
  if (reduced.size() != basis.reduced_dim())
    throw Error(Error::Code::InvalidArg, "lift: length mismatch");
  ProjectedState st;
  st.n = basis.n;
  st.d = basis.d;
  st.reduced = reduced;
  st.y = basis.B * reduced;
  return st;
}

double hamiltonian(const PairPotential& pot, const Configuration& cfg) {
  check_cfg(cfg);
  const int n = cfg.n, d = cfg.d;
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double r2 = 0.0;
      for (int a = 0; a < d; ++a) {
        double diff = cfg.x[i * d + a] - cfg.x[j * d + a];
        r2 += diff * diff;
      }
      sum += pot.eval(std::sqrt(r2)).w;
    }
  return sum / n; // (1/2N) * double sum = (1/N) * sum over unordered pairs
}

VectorXd grad_hamiltonian(const PairPotential& pot, const Configuration& cfg) {
  check_cfg(cfg);
  const int n = cfg.n, d = cfg.d;
  VectorXd g = VectorXd::Zero(n * d);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double r2 = 0.0;
      for (int a = 0; a < d; ++a) {
        double diff = cfg.x[i * d + a] - cfg.x[j * d + a];
        r2 += diff * diff;
      }
      double r = std::sqrt(r2);
      if (r < 1e-300) continue; // grad W(0) = 0: removable singularity
      double coef = pot.eval(r).wp / (r * n);
      for (int a = 0; a < d; ++a) {
        double diff = cfg.x[i * d + a] - cfg.x[j * d + a];
        g[i * d + a] += coef * diff;
        g[j * d + a] -= coef * diff;
      }
    }
  return g;
}

double laplacian_hamiltonian(const PairPotential& pot, const Configuration& cfg) {
  check_cfg(cfg);
  const int n = cfg.n, d = cfg.d;
  double w0pp = pot.eval(0.0).wpp;
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double r2 = 0.0;
      for (int a = 0; a < d; ++a) {
        double diff = cfg.x[i * d + a] - cfg.x[j * d + a];
        r2 += diff * diff;
      }
      double r = std::sqrt(r2);
      WEval e = pot.eval(r);
      double radial = e.wpp;
      double tang = (r > 1e-12) ? e.wp / r : w0pp;
      sum += 2.0 * (radial + (d - 1) * tang);
    }
  return sum / n;
}

double energy_reduced(const PairPotential& pot, const ReducedBasis& basis, const VectorXd& z) {
  Configuration cfg{basis.n, basis.d, basis.B * z};
  return hamiltonian(pot, cfg);
}

VectorXd grad_reduced(const PairPotential& pot, const ReducedBasis& basis, const VectorXd& z) {
  Configuration cfg{basis.n, basis.d, basis.B * z};
  return basis.B.transpose() * grad_hamiltonian(pot, cfg);
}

double laplacian_reduced(const PairPotential& pot, const ReducedBasis& basis, const VectorXd& z) {
  // the ambient Hessian kills translations, so the trace over the zero-mean
  // subspace equals the full ambient trace
  Configuration cfg{basis.n, basis.d, basis.B * z};
  return laplacian_hamiltonian(pot, cfg);
}

double droplet_statistic(const ProjectedState& st) {
  return st.y.squaredNorm() / st.n;
}

double droplet_statistic_pair_form(const Configuration& cfg) {
  check_cfg(cfg);
  const int n = cfg.n, d = cfg.d;
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double r2 = 0.0;
      for (int a = 0; a < d; ++a) {
        double diff = cfg.x[i * d + a] - cfg.x[j * d + a];
        r2 += diff * diff;
      }
      sum += r2;
    }
  return sum / (2.0 * n * n);
}

HessianAtZero hessian_at_zero(const PairPotential& pot, int n, int d) {
  if (n < 2 || d < 1) throw Error(Error::Code::InvalidArg, "hessian needs n>=2, d>=1");
  double w0pp = pot.eval(0.0).wpp;
  HessianAtZero h;
  h.full = MatrixXd::Zero(n * d, n * d);
  // diagonal blocks ((n-1)/n) w''(0) I_d, off-diagonal blocks -(1/n) w''(0) I_d
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int a = 0; a < d; ++a)
        h.full(i * d + a, j * d + a) = (i == j) ? (n - 1) * w0pp / n : -w0pp / n;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(h.full);
  h.spectrum = es.eigenvalues();
  ReducedBasis basis = reduced_basis(n, d);
  h.reduced = basis.B.transpose() * h.full * basis.B;
  return h;
}

ValleyDepth valley_depth(const PairPotential& pot, int n, int d, double delta,
                         int starts, double tol) {
  if (!pot.delta_admissible(delta))
    throw Error(Error::Code::InvalidArg, "valley depth: delta outside the admissible range");
  ReducedBasis basis = reduced_basis(n, d);
  const int k = basis.reduced_dim();
  const double radius = std::sqrt(double(n)) * delta;

  ValleyDepth out;
  out.starts = std::max(starts, 2);

  if (k == 1) { // the sphere is two points
    VectorXd z(1);
    z[0] = radius;
    double up = energy_reduced(pot, basis, z);
    z[0] = -radius;
    out.value = std::min(up, energy_reduced(pot, basis, z));
    out.converged = true;
    return out;
  }

  NormalStream dirs(0x5EEDu, 0xD1u); // fixed start list, deterministic
  double best = std::numeric_limits<double>::infinity();
  bool any_converged = false;
  for (int s = 0; s < out.starts; ++s) {
    VectorXd z(k);
    dirs.normals(s, z.data(), k);
    if (z.norm() < 1e-12) z.setOnes();
    z *= radius / z.norm();
    double step = 0.1 * radius;
    double e = energy_reduced(pot, basis, z);
    bool converged = false;
    for (int it = 0; it < 5000; ++it) {
      VectorXd g = grad_reduced(pot, basis, z);
      VectorXd gt = g - (g.dot(z) / (radius * radius)) * z; // tangential part
      if (gt.norm() < tol) { converged = true; break; }
      // backtracking step on the sphere
      bool moved = false;
      for (int bt = 0; bt < 40; ++bt) {
        VectorXd trial = z - step * gt;
        trial *= radius / trial.norm();
        double et = energy_reduced(pot, basis, trial);
        if (et < e - 1e-14) {
          z = trial; e = et; moved = true;
          step *= 1.3;
          break;
        }
        step *= 0.5;
      }
      if (!moved) { converged = gt.norm() < std::sqrt(tol); break; }
    }
    any_converged = any_converged || converged;
    best = std::min(best, e);
  }
  if (!any_converged)
    throw Error(Error::Code::Numeric,
                "valley depth: no start converged; best value " + std::to_string(best));
  out.value = best;
  out.converged = true;

  double margin = pot.delta_margin(delta);
  if (out.value < margin - 1e-9)
    throw Error(Error::Code::Numeric, "valley depth below its quadratic lower bound");
  return out;
}

FlowResult gradient_flow(const PairPotential& pot, const ReducedBasis& basis,
                         const VectorXd& z0, double dt, double t_max) {
  if (!(dt > 0.0) || !(t_max > 0.0))
    throw Error(Error::Code::InvalidArg, "gradient flow needs dt>0, t_max>0");
  FlowResult res;
  VectorXd z = z0;
  double e = energy_reduced(pot, basis, z);
  res.path.push_back(z);
  res.energy.push_back(e);
  int steps = static_cast<int>(std::ceil(t_max / dt));
  for (int k = 1; k <= steps; ++k) {
    z -= dt * grad_reduced(pot, basis, z);
    double enew = energy_reduced(pot, basis, z);
    if (enew > e + 1e-12 * (1.0 + std::abs(e)))
      throw Error(Error::Code::Numeric,
                  "gradient flow: energy increased at t=" + std::to_string(k * dt) +
                      " (step size too large)");
    e = enew;
    res.path.push_back(z);
    res.energy.push_back(e);
  }
  res.t_end = steps * dt;
  return res;
}

} // namespace droplet
