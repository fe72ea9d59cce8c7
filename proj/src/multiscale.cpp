#include "droplet/multiscale.hpp"

#include <algorithm>
#include <cmath>

namespace droplet {

namespace {

int clamp_k(const SpectralResult& sp, int k_use) {
  int m = static_cast<int>(sp.lambda.size());
  if (k_use <= 0 || k_use > m) return m;
  return k_use;
}

} // namespace

double eigen_overlap(const SpectralResult& sp, const VectorXd& nu, int k) {
  if (nu.size() != sp.vectors.rows())
    throw Error(Error::Code::InvalidArg, "density has wrong size");
  if (k < 0 || k >= sp.vectors.cols())
    throw Error(Error::Code::InvalidArg, "eigenpair index out of range");
  double s = 0.0;
  for (int i = 0; i < nu.size(); ++i) s += sp.vectors(i, k) * nu[i] * sp.cell;
  return s;
}

VectorXd mixture_density(const SpectralResult& sp, const VectorXd& nu, double t,
                         int k_use) {
  int m = clamp_k(sp, k_use);
  VectorXd rho = VectorXd::Zero(nu.size());
  for (int k = 0; k < m; ++k) {
    double c = std::exp(-sp.lambda[static_cast<std::size_t>(k)] * t) * eigen_overlap(sp, nu, k);
    for (int i = 0; i < rho.size(); ++i) rho[i] += c * sp.vectors(i, k) * sp.u[i];
  }
  return rho;
}

double survival_probability(const SpectralResult& sp, const VectorXd& nu, double t,
                            int k_use) {
  int m = clamp_k(sp, k_use);
  double s = 0.0;
  for (int k = 0; k < m; ++k) {
    double mean_p = 0.0;
    for (int i = 0; i < nu.size(); ++i) mean_p += sp.vectors(i, k) * sp.u[i] * sp.cell;
    s += std::exp(-sp.lambda[static_cast<std::size_t>(k)] * t) * eigen_overlap(sp, nu, k) * mean_p;
  }
  return s;
}

double mixture_expectation(const SpectralResult& sp, const VectorXd& nu,
                           const VectorXd& f_vals, double f_star, double t, int k_use) {
  VectorXd rho = mixture_density(sp, nu, t, k_use);
  double on_ball = 0.0;
  for (int i = 0; i < rho.size(); ++i) on_ball += f_vals[i] * rho[i] * sp.cell;
  double surv = survival_probability(sp, nu, t, k_use);
  return on_ball + f_star * (1.0 - surv);
}

double l2p_density_ratio(const SpectralResult& sp, const VectorXd& nu) {
  if (nu.size() != sp.u.size())
    throw Error(Error::Code::InvalidArg, "density has wrong size");
  double s = 0.0;
  for (int i = 0; i < nu.size(); ++i) {
    if (nu[i] == 0.0) continue;
    if (sp.u[i] <= 0.0)
      throw Error(Error::Code::Numeric, "initial density not absolutely continuous w.r.t. p");
    s += nu[i] * nu[i] / sp.u[i] * sp.cell;
  }
  return std::sqrt(s);
}

double mixture_truncation_bound(const SpectralResult& sp, const VectorXd& nu,
                                const VectorXd& f_vals, double f_star, double t) {
  double fn = 0.0;
  for (int i = 0; i < f_vals.size(); ++i) {
    double g = f_vals[i] - f_star;
    fn += g * g * sp.u[i] * sp.cell;
  }
  double lam_last = sp.lambda.back();
  return std::exp(-lam_last * t) * std::sqrt(fn) * l2p_density_ratio(sp, nu);
}

StarMeasure star_from_samples(const std::vector<double>& alive, int n_total) {
  if (n_total <= 0) throw Error(Error::Code::InvalidArg, "empty sample set");
  StarMeasure m;
  m.z = alive;
  m.mass.assign(alive.size(), 1.0 / n_total);
  m.star_mass = static_cast<double>(n_total - static_cast<int>(alive.size())) / n_total;
  return m;
}

StarMeasure star_from_grid(const SpectralResult& sp, const VectorXd& density,
                           double ball_mass) {
  if (sp.dim != 1)
    throw Error(Error::Code::InvalidArg, "star measures are 1D only");
  StarMeasure m;
  double total = 0.0;
  for (int i = 0; i < density.size(); ++i) total += density[i] * sp.cell;
  if (total <= 0) throw Error(Error::Code::InvalidArg, "density has no mass");
  for (int i = 0; i < density.size(); ++i) {
    if (density[i] == 0.0) continue;
    m.z.push_back(sp.nodes(i, 0));
    m.mass.push_back(density[i] * sp.cell / total * ball_mass);
  }
  m.star_mass = 1.0 - ball_mass;
  return m;
}

std::vector<double> star_bins(const StarMeasure& m, double R, int bins) {
  std::vector<double> out(static_cast<std::size_t>(bins) + 1, 0.0);
  double width = 2.0 * R / bins;
  for (std::size_t i = 0; i < m.z.size(); ++i) {
    double zi = m.z[i];
    if (zi <= -R || zi >= R) {
      out[static_cast<std::size_t>(bins)] += m.mass[i]; // boundary mass belongs to the cemetery
      continue;
    }
    int b = std::min(bins - 1, static_cast<int>((zi + R) / width));
    out[static_cast<std::size_t>(b)] += m.mass[i];
  }
  out[static_cast<std::size_t>(bins)] += m.star_mass;
  return out;
}

double tv_binned(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw Error(Error::Code::InvalidArg, "bin count mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

double w1_star(const StarMeasure& a, const StarMeasure& b, double R) {
  // circle coordinate t = z + R in [0, 2R); the cemetery sits at t = 0
  struct Ev {
    double t, m;
  };
  std::vector<Ev> ev;
  ev.reserve(a.z.size() + b.z.size() + 2);
  double sa = a.star_mass, sb = b.star_mass;
  for (std::size_t i = 0; i < a.z.size(); ++i) {
    if (std::abs(a.z[i]) >= R)
      sa += a.mass[i];
    else
      ev.push_back({a.z[i] + R, a.mass[i]});
  }
  for (std::size_t i = 0; i < b.z.size(); ++i) {
    if (std::abs(b.z[i]) >= R)
      sb += b.mass[i];
    else
      ev.push_back({b.z[i] + R, -b.mass[i]});
  }
  ev.push_back({0.0, sa - sb});
  std::sort(ev.begin(), ev.end(), [](const Ev& x, const Ev& y) { return x.t < y.t; });
  double total = 0.0;
  for (const Ev& e : ev) total += e.m;
  if (std::abs(total) > 1e-9)
    throw Error(Error::Code::InvalidArg, "measures must have equal total mass");

  // piecewise-constant CDF difference D on the circle; W1 = min_c int |D - c|
  std::vector<std::pair<double, double>> seg; // (D value, length)
  double D = 0.0;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    D += ev[i].m;
    double t_next = (i + 1 < ev.size()) ? ev[i + 1].t : 2.0 * R;
    double len = t_next - ev[i].t;
    if (len > 0) seg.emplace_back(D, len);
  }
  if (ev.front().t > 0.0) seg.emplace_back(0.0, ev.front().t);
  // weighted median of D values
  std::sort(seg.begin(), seg.end());
  double wsum = 0.0;
  for (auto& s : seg) wsum += s.second;
  double acc = 0.0, c = seg.front().first;
  for (auto& s : seg) {
    acc += s.second;
    if (acc >= 0.5 * wsum) {
      c = s.first;
      break;
    }
  }
  double w1 = 0.0;
  for (auto& s : seg) w1 += std::abs(s.first - c) * s.second;
  return w1;
}

double tv_bound(const SpectralResult& sp, const VectorXd& nu, double t) {
  if (sp.lambda.size() < 2)
    throw Error(Error::Code::InvalidArg, "need at least two eigenvalues for the bound");
  return 2.0 * std::exp(-sp.lambda[1] * t) * l2p_density_ratio(sp, nu);
}

double w1_bound(const SpectralResult& sp, const VectorXd& nu, double t) {
  if (sp.lambda.size() < 2)
    throw Error(Error::Code::InvalidArg, "need at least two eigenvalues for the bound");
  return sp.R * std::exp(-sp.lambda[1] * t) * l2p_density_ratio(sp, nu);
}

StarMeasure two_term_mixture(const SpectralResult& sp, const VectorXd& nu, double t) {
  double a = sp.alpha(nu) * std::exp(-sp.lambda[0] * t);
  return star_from_grid(sp, sp.qsd, a);
}

double t_window(double lambda1, double lambda2) {
  if (lambda1 <= 0 || lambda2 <= 0)
    throw Error(Error::Code::InvalidArg, "eigenvalues must be positive");
  return 1.0 / std::sqrt(lambda1 * lambda2);
}

VectorXd conditioned_density(const SpectralResult& sp, const VectorXd& nu, double t,
                             int k_use) {
  VectorXd rho = mixture_density(sp, nu, t, k_use);
  double s = survival_probability(sp, nu, t, k_use);
  if (s <= 0) throw Error(Error::Code::Numeric, "vanishing survival probability");
  return rho / s;
}

VectorXd obs_const_one(const SpectralResult& sp) {
  return VectorXd::Ones(sp.nodes.rows());
}

VectorXd obs_droplet(const SpectralResult& sp, int n_particles) {
  VectorXd f(sp.nodes.rows());
  for (int i = 0; i < f.size(); ++i)
    f[i] = sp.nodes.row(i).squaredNorm() / n_particles;
  return f;
}

VectorXd obs_bump(const SpectralResult& sp, double r0) {
  VectorXd f = VectorXd::Zero(sp.nodes.rows());
  for (int i = 0; i < f.size(); ++i) {
    double r = sp.nodes.row(i).norm();
    if (r < r0) {
      double s = (r / r0) * (r / r0);
      f[i] = std::exp(1.0 - 1.0 / (1.0 - s));
    }
  }
  return f;
}

VectorXd obs_boundary_dist(const SpectralResult& sp) {
  VectorXd f(sp.nodes.rows());
  for (int i = 0; i < f.size(); ++i) f[i] = sp.R - sp.nodes.row(i).norm();
  return f;
}

} // namespace droplet
