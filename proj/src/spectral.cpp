#include "droplet/spectral.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <queue>
#include <vector>

namespace droplet {

namespace {

// ---------- long-double tridiagonal kernel ----------

int sturm_count(const Tridiag& T, long double tau, long double pivmin) {
  const std::size_t n = T.diag.size();
  int count = 0;
  long double d = 1.0L;
  for (std::size_t i = 0; i < n; ++i) {
    long double b2 = i > 0 ? T.off[i - 1] * T.off[i - 1] : 0.0L;
    d = (T.diag[i] - tau) - b2 / d;
    if (fabsl(d) < pivmin) d = -pivmin;
    if (d < 0.0L) ++count;
  }
  return count;
}

long double pivmin_for(const Tridiag& T) {
  long double bmax = 1.0L;
  for (long double b : T.off) bmax = std::max(bmax, b * b);
  return LDBL_MIN * bmax * 4.0L;
}

} // namespace

long double tridiag_eigenvalue(const Tridiag& T, int k) {
  const std::size_t n = T.diag.size();
  if (k < 0 || static_cast<std::size_t>(k) >= n)
    throw Error(Error::Code::InvalidArg, "eigenvalue index out of range");
  long double lo = T.diag[0], hi = T.diag[0];
  for (std::size_t i = 0; i < n; ++i) {
    long double r = (i > 0 ? fabsl(T.off[i - 1]) : 0.0L) +
                    (i + 1 < n ? fabsl(T.off[i]) : 0.0L);
    lo = std::min(lo, T.diag[i] - r);
    hi = std::max(hi, T.diag[i] + r);
  }
  long double pivmin = pivmin_for(T);
  // bisect on the Sturm count: find tau with count(tau) <= k < count(tau+)
  for (int it = 0; it < 40000; ++it) {
    long double mid = 0.5L * (lo + hi);
    long double tol = 8.0L * LDBL_EPSILON * std::max(fabsl(lo), fabsl(hi));
    if (hi - lo <= tol || mid == lo || mid == hi) break;
    if (sturm_count(T, mid, pivmin) <= k)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5L * (lo + hi);
}

std::vector<long double> tridiag_eigenvector(const Tridiag& T, long double lambda) {
  const int n = static_cast<int>(T.diag.size());
  // banded LU of (T - lambda I) with partial pivoting; bandwidth grows to 2
  std::vector<long double> u(n), v(n, 0.0L), w(n, 0.0L), mult(n, 0.0L);
  std::vector<char> swapped(n, 0);
  for (int i = 0; i < n; ++i) u[i] = T.diag[i] - lambda;
  for (int i = 0; i + 1 < n; ++i) v[i] = T.off[i];
  long double pivmin = pivmin_for(T);
  for (int i = 0; i + 1 < n; ++i) {
    long double sub = T.off[i]; // entry (i+1, i) before elimination
    if (fabsl(sub) > fabsl(u[i])) {
      // swap rows i and i+1
      std::swap(u[i], sub);               // u[i] <- off, sub <- old diag-ish
      long double vi = v[i];
      v[i] = u[i + 1];
      u[i + 1] = vi;
      w[i] = v[i + 1];
      v[i + 1] = 0.0L;
      swapped[i] = 1;
    }
    if (fabsl(u[i]) < pivmin) u[i] = pivmin;
    long double m = sub / u[i];
    mult[i] = m;
    u[i + 1] -= m * v[i];
    if (i + 2 <= n - 1) v[i + 1] -= m * w[i];
  }
  if (fabsl(u[n - 1]) < pivmin) u[n - 1] = pivmin;

  auto solve = [&](std::vector<long double>& x) {
    // forward: apply the recorded row operations to the RHS
    for (int i = 0; i + 1 < n; ++i) {
      if (swapped[i]) std::swap(x[i], x[i + 1]);
      x[i + 1] -= mult[i] * x[i];
    }
    // back substitution
    for (int i = n - 1; i >= 0; --i) {
      long double s = x[i];
      if (i + 1 < n) s -= v[i] * x[i + 1];
      if (i + 2 < n) s -= w[i] * x[i + 2];
      x[i] = s / u[i];
    }
    long double nrm = 0.0L;
    for (long double t : x) nrm += t * t;
    nrm = sqrtl(nrm);
    for (long double& t : x) t /= nrm;
  };

  // deterministic non-symmetric start so odd/even modes are both reachable
  std::vector<long double> x(n);
  std::uint64_t state = 0x9E3779B97F4A7C15ull;
  for (int i = 0; i < n; ++i) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    x[i] = static_cast<long double>(state >> 11) / 9007199254740992.0L - 0.5L;
  }
  for (int it = 0; it < 4; ++it) solve(x);
  return x;
}

namespace {

// ---------- reduced potential in long double (1D chart, N = 2, d = 1) ----------

struct Reduced1d {
  const PairPotential* pot;
  double n_particles;
  // U(z) = H(lift(z)); for the two-particle chart U(z) = w(sqrt(2)|z|)/2
  long double U(long double z) const {
    long double r = sqrtl(2.0L) * fabsl(z);
    if (pot->family() == PairPotential::Family::GaussianWell) {
      long double a = pot->amplitude(), s = pot->width();
      return 0.5L * a * (1.0L - expl(-(r / s) * (r / s)));
    }
    return 0.5L * static_cast<long double>(pot->eval(static_cast<double>(r)).w);
  }
  double Up(double z) const { // U'(z), odd
    double r = std::sqrt(2.0) * std::abs(z);
    double wp = pot->eval(r).wp;
    double v = wp / std::sqrt(2.0);
    return z >= 0 ? v : -v;
  }
  double Upp(double z) const { return pot->eval(std::sqrt(2.0) * std::abs(z)).wpp; }
};

Tridiag assemble_1d(const Reduced1d& red, const SpectralOptions& opt, double R,
                    double h, const std::vector<double>& nodes) {
  const int n = static_cast<int>(nodes.size());
  Tridiag T;
  T.diag.resize(n);
  T.off.assign(n - 1, 0.0L);
  long double binv = 1.0L / static_cast<long double>(opt.beta);
  long double hh = static_cast<long double>(h) * static_cast<long double>(h);
  if (opt.form == Form::WeightedDivergence) {
    for (int i = 0; i < n; ++i) {
      long double z = nodes[static_cast<std::size_t>(i)];
      long double Ui = red.U(z);
      long double Ul = red.U(z - h);
      long double Ur = red.U(z + h);
      long double bb = static_cast<long double>(opt.beta) * 0.5L;
      T.diag[i] = binv / hh * (expl(bb * (Ui - Ul)) + expl(bb * (Ui - Ur)));
      if (i + 1 < n) T.off[i] = -binv / hh;
    }
  } else {
    for (int i = 0; i < n; ++i) {
      double z = nodes[static_cast<std::size_t>(i)];
      double up = red.Up(z);
      double vb = 0.25 * opt.beta * up * up - 0.5 * red.Upp(z);
      long double val = 2.0L * binv / hh + static_cast<long double>(vb);
      if (opt.form == Form::Penalized) {
        double excess = std::max(0.0, std::abs(z) - R);
        val += static_cast<long double>(opt.beta) *
               static_cast<long double>(excess * excess * excess * excess);
      }
      T.diag[i] = val;
      if (i + 1 < n) T.off[i] = -binv / hh;
    }
  }
  return T;
}

void finalize_result(SpectralResult& res, const std::vector<VectorXd>& raw_flat) {
  // raw_flat: flat-normalized eigenvectors of the symmetrized operator.
  // Convert to e_k = phi_k exp(+beta U/2) sqrt(Z_h/h^dim), orthonormal in L^2(p).
  const int nn = static_cast<int>(res.U.size());
  const int m = static_cast<int>(raw_flat.size());
  double Zh = 0.0;
  VectorXd weight(nn);
  for (int i = 0; i < nn; ++i) {
    weight[i] = std::exp(-res.beta * res.U[i]);
    Zh += weight[i] * res.cell;
  }
  res.u = weight / Zh;
  res.vectors.resize(nn, m);
  double scale = std::sqrt(Zh / res.cell);
  for (int k = 0; k < m; ++k) {
    VectorXd e(nn);
    for (int i = 0; i < nn; ++i)
      e[i] = raw_flat[static_cast<std::size_t>(k)][i] * std::exp(0.5 * res.beta * res.U[i]) * scale;
    // canonical sign: largest-magnitude entry positive
    int imax = 0;
    for (int i = 1; i < nn; ++i)
      if (std::abs(e[i]) > std::abs(e[imax])) imax = i;
    if (e[imax] < 0) e = -e;
    res.vectors.col(k) = e;
  }
  // ground state: enforce positivity and build the QSD
  VectorXd e1 = res.vectors.col(0);
  double mean_p = 0.0;
  for (int i = 0; i < nn; ++i) mean_p += e1[i] * res.u[i] * res.cell;
  if (mean_p < 0) {
    e1 = -e1;
    res.vectors.col(0) = e1;
    mean_p = -mean_p;
  }
  res.e1_mean_p = mean_p;
  res.qsd.resize(nn);
  for (int i = 0; i < nn; ++i) res.qsd[i] = e1[i] * res.u[i] / mean_p;
}

SpectralResult solve_1d(const PairPotential& pot, const ReducedBasis& basis,
                        const SpectralOptions& opt) {
  const double R = std::sqrt(static_cast<double>(basis.n)) * opt.delta;
  const double h = 2.0 * R / opt.grid;
  if (opt.refuse_coarse && h > 0.25 / std::sqrt(opt.beta))
    throw Error(Error::Code::Config,
                "grid too coarse: h must not exceed beta^{-1/2}/4 (raise grid)");
  Reduced1d red{&pot, static_cast<double>(basis.n)};

  // node layout: interior points of [-L, L], aligned with the ball grid
  int n_side = 0;
  if (opt.form == Form::Penalized)
    n_side = static_cast<int>(std::ceil(opt.pen_ext / h));
  double L = R + n_side * h;
  int n_cells = opt.grid + 2 * n_side;
  int nn = n_cells - 1;
  std::vector<double> nodes(static_cast<std::size_t>(nn));
  for (int i = 0; i < nn; ++i) nodes[static_cast<std::size_t>(i)] = -L + (i + 1) * h;

  if (opt.m < 1 || opt.m > nn)
    throw Error(Error::Code::InvalidArg, "requested eigenpair count out of range");

  Tridiag T = assemble_1d(red, opt, R, h, nodes);

  SpectralResult res;
  res.beta = opt.beta;
  res.delta = opt.delta;
  res.R = R;
  res.h = h;
  res.dim = 1;
  res.cell = h;
  res.nodes.resize(nn, 1);
  res.U.resize(nn);
  for (int i = 0; i < nn; ++i) {
    res.nodes(i, 0) = nodes[static_cast<std::size_t>(i)];
    res.U[i] = static_cast<double>(red.U(nodes[static_cast<std::size_t>(i)]));
  }

  std::vector<VectorXd> raw;
  raw.reserve(static_cast<std::size_t>(opt.m));
  res.lambda.reserve(static_cast<std::size_t>(opt.m));
  for (int k = 0; k < opt.m; ++k) {
    long double lam = tridiag_eigenvalue(T, k);
    std::vector<long double> phi = tridiag_eigenvector(T, lam);
    VectorXd p(nn);
    for (int i = 0; i < nn; ++i) p[i] = static_cast<double>(phi[static_cast<std::size_t>(i)]);
    p /= p.norm();
    res.lambda.push_back(static_cast<double>(lam));
    raw.push_back(std::move(p));
  }
  finalize_result(res, raw);
  return res;
}

// ---------- 2D masked-disc assembly ----------

SpectralResult solve_2d(const PairPotential& pot, const ReducedBasis& basis,
                        const SpectralOptions& opt) {
  if (opt.form != Form::WeightedDivergence)
    throw Error(Error::Code::Config,
                "2D spectral solve supports only the weighted divergence form");
  const double R = std::sqrt(static_cast<double>(basis.n)) * opt.delta;
  const double h = 2.0 * R / opt.grid;
  if (opt.refuse_coarse && h > 0.25 / std::sqrt(opt.beta))
    throw Error(Error::Code::Config,
                "grid too coarse: h must not exceed beta^{-1/2}/4 (raise grid)");
  const int M = opt.grid - 1; // nodes per axis
  auto coord = [&](int i) { return -R + (i + 1) * h; };

  // index map for nodes strictly inside the disc
  std::vector<int> idx(static_cast<std::size_t>(M) * M, -1);
  std::vector<std::pair<int, int>> cells;
  for (int j = 0; j < M; ++j)
    for (int i = 0; i < M; ++i) {
      double x = coord(i), y = coord(j);
      if (x * x + y * y < R * R) {
        idx[static_cast<std::size_t>(j) * M + i] = static_cast<int>(cells.size());
        cells.emplace_back(i, j);
      }
    }
  const int nn = static_cast<int>(cells.size());
  if (nn == 0) throw Error(Error::Code::Config, "grid too coarse: no interior nodes");
  if (opt.m < 1 || opt.m > nn)
    throw Error(Error::Code::InvalidArg, "requested eigenpair count out of range");

  SpectralResult res;
  res.beta = opt.beta;
  res.delta = opt.delta;
  res.R = R;
  res.h = h;
  res.dim = 2;
  res.cell = h * h;
  res.nodes.resize(nn, 2);
  res.U.resize(nn);
  VectorXd zbuf(2);
  auto Uat = [&](double x, double y) {
    zbuf[0] = x;
    zbuf[1] = y;
    return energy_reduced(pot, basis, zbuf);
  };
  for (int q = 0; q < nn; ++q) {
    double x = coord(cells[static_cast<std::size_t>(q)].first);
    double y = coord(cells[static_cast<std::size_t>(q)].second);
    res.nodes(q, 0) = x;
    res.nodes(q, 1) = y;
    res.U[q] = Uat(x, y);
  }

  const double binv = 1.0 / opt.beta;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(nn) * 5);
  const int di[4] = {1, -1, 0, 0};
  const int dj[4] = {0, 0, 1, -1};
  for (int q = 0; q < nn; ++q) {
    auto [i, j] = cells[static_cast<std::size_t>(q)];
    double diag = 0.0;
    for (int t = 0; t < 4; ++t) {
      int ii = i + di[t], jj = j + dj[t];
      double xn = coord(ii), yn = coord(jj);
      double Un = Uat(xn, yn); // defined beyond the disc as well
      diag += binv / (h * h) * std::exp(0.5 * opt.beta * (res.U[q] - Un));
      int nb = (ii >= 0 && ii < M && jj >= 0 && jj < M)
                   ? idx[static_cast<std::size_t>(jj) * M + ii]
                   : -1;
      if (nb >= 0) trips.emplace_back(q, nb, -binv / (h * h));
    }
    trips.emplace_back(q, q, diag);
  }
  Eigen::SparseMatrix<double> A(nn, nn);
  A.setFromTriplets(trips.begin(), trips.end());

  std::vector<VectorXd> raw;
  if (nn < 2500) {
    MatrixXd Ad(A);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(Ad);
    if (es.info() != Eigen::Success)
      throw Error(Error::Code::Numeric, "dense eigensolver failed");
    for (int k = 0; k < opt.m; ++k) {
      res.lambda.push_back(es.eigenvalues()[k]);
      raw.push_back(es.eigenvectors().col(k));
    }
  } else {
    // shift-invert Lanczos at zero shift with full reorthogonalization
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
    if (ldlt.info() != Eigen::Success)
      throw Error(Error::Code::Numeric, "sparse factorization failed");
    const int J = std::min(nn, std::max(120, 10 * opt.m));
    MatrixXd V(nn, J);
    std::vector<double> al(static_cast<std::size_t>(J)), be(static_cast<std::size_t>(J), 0.0);
    VectorXd v(nn);
    std::uint64_t st = 0xC0FFEEULL;
    for (int i = 0; i < nn; ++i) {
      st = st * 6364136223846793005ull + 1442695040888963407ull;
      v[i] = static_cast<double>(st >> 11) * 0x1p-53 - 0.5;
    }
    v /= v.norm();
    V.col(0) = v;
    int built = 0;
    for (int j = 0; j < J; ++j) {
      VectorXd w = ldlt.solve(V.col(j));
      al[static_cast<std::size_t>(j)] = V.col(j).dot(w);
      w -= al[static_cast<std::size_t>(j)] * V.col(j);
      if (j > 0) w -= be[static_cast<std::size_t>(j - 1)] * V.col(j - 1);
      // full reorthogonalization, twice
      for (int r = 0; r < 2; ++r)
        for (int i = 0; i <= j; ++i) w -= V.col(i).dot(w) * V.col(i);
      built = j + 1;
      double nb = w.norm();
      if (j + 1 < J) {
        if (nb < 1e-13) break;
        be[static_cast<std::size_t>(j)] = nb;
        V.col(j + 1) = w / nb;
      }
    }
    MatrixXd Tm = MatrixXd::Zero(built, built);
    for (int i = 0; i < built; ++i) {
      Tm(i, i) = al[static_cast<std::size_t>(i)];
      if (i + 1 < built) {
        Tm(i, i + 1) = be[static_cast<std::size_t>(i)];
        Tm(i + 1, i) = be[static_cast<std::size_t>(i)];
      }
    }
    if (built < opt.m)
      throw Error(Error::Code::Numeric, "Lanczos broke down before enough eigenpairs");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(Tm);
    // largest theta of A^{-1} correspond to smallest eigenvalues of A
    std::vector<std::pair<double, VectorXd>> pairs;
    for (int k = 0; k < opt.m; ++k) {
      int col = built - 1 - k;
      double theta = es.eigenvalues()[col];
      if (theta <= 0)
        throw Error(Error::Code::Numeric, "shift-invert Lanczos failed to converge");
      VectorXd y = V.leftCols(built) * es.eigenvectors().col(col);
      y /= y.norm();
      double lam = 1.0 / theta;
      double resid = (A * y - lam * y).norm();
      if (resid > 1e-7 * std::abs(A.coeff(0, 0)))
        throw Error(Error::Code::Numeric, "Lanczos eigenpair residual too large");
      pairs.emplace_back(lam, std::move(y));
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& pr : pairs) {
      res.lambda.push_back(pr.first);
      raw.push_back(std::move(pr.second));
    }
  }
  finalize_result(res, raw);
  return res;
}

} // namespace

SpectralResult solve_spectrum(const PairPotential& pot, const ReducedBasis& basis,
                              const SpectralOptions& opt) {
  if (opt.beta <= 0) throw Error(Error::Code::InvalidArg, "beta must be positive");
  if (!pot.delta_admissible(opt.delta))
    throw Error(Error::Code::Config, "delta outside the admissible range of the potential");
  if (opt.grid < 8) throw Error(Error::Code::InvalidArg, "grid too small");
  int k = basis.reduced_dim();
  if (k == 1) return solve_1d(pot, basis, opt);
  if (k == 2) return solve_2d(pot, basis, opt);
  throw Error(Error::Code::Config,
              "spectral solver supports reduced dimension 1 or 2 only");
}

double SpectralResult::qsd_mean(const VectorXd& f_vals) const {
  if (f_vals.size() != qsd.size())
    throw Error(Error::Code::InvalidArg, "observable values have wrong size");
  double s = 0.0;
  for (int i = 0; i < qsd.size(); ++i) s += f_vals[i] * qsd[i] * cell;
  return s;
}

double SpectralResult::alpha(const VectorXd& nu_density) const {
  if (nu_density.size() != vectors.rows())
    throw Error(Error::Code::InvalidArg, "initial density has wrong size");
  double mean_nu = 0.0;
  for (int i = 0; i < vectors.rows(); ++i)
    mean_nu += vectors(i, 0) * nu_density[i] * cell;
  return mean_nu * e1_mean_p;
}

std::vector<double> harmonic_levels(const PairPotential& pot, int n, int d, int m) {
  if (m < 1) throw Error(Error::Code::InvalidArg, "need at least one level");
  HessianAtZero H = hessian_at_zero(pot, n, d);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(H.reduced);
  VectorXd mu = es.eigenvalues();
  const int k = static_cast<int>(mu.size());
  for (int i = 0; i < k; ++i)
    if (mu[i] <= 0)
      throw Error(Error::Code::Numeric, "reduced Hessian is not positive definite");

  // enumerate sums n_1 mu_1 + ... + n_k mu_k in ascending order; each
  // multi-index is produced once by only incrementing indices >= the last one
  struct Node {
    double val;
    int last;
    std::vector<int> cnt;
  };
  auto cmp = [](const Node& a, const Node& b) { return a.val > b.val; };
  std::priority_queue<Node, std::vector<Node>, decltype(cmp)> heap(cmp);
  heap.push({0.0, 0, std::vector<int>(static_cast<std::size_t>(k), 0)});
  std::vector<double> levels;
  levels.reserve(static_cast<std::size_t>(m));
  while (static_cast<int>(levels.size()) < m && !heap.empty()) {
    Node nd = heap.top();
    heap.pop();
    levels.push_back(nd.val);
    for (int j = nd.last; j < k; ++j) {
      Node nx = nd;
      nx.val += mu[j];
      nx.last = j;
      nx.cnt[static_cast<std::size_t>(j)] += 1;
      heap.push(std::move(nx));
    }
  }
  return levels;
}

} // namespace droplet
