#include "droplet/potential.hpp"

#include <cmath>

namespace droplet {

namespace {

// min of the two radial Hessian eigenvalues of W(x)=w(|x|):
// w''(r) (radial) and w'(r)/r (tangential; w''(0) in the r->0 limit)
double hessian_min(const PairPotential& pot, double r) {
  WEval e = pot.eval(r);
  double tang = (r > 1e-12) ? e.wp / r : pot.eval(0.0).wpp;
  return std::min(e.wpp, tang);
}

double golden_min(const std::function<double(double)>& f, double lo, double hi) {
  const double gr = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 200 && (b - a) > 1e-13 * (1.0 + std::abs(a)); ++it) {
    if (f1 < f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - gr * (b - a); f1 = f(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + gr * (b - a); f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

double bisect_root(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo), fhi = f(hi);
  if (flo * fhi > 0.0) throw Error(Error::Code::Numeric, "bisection: no sign change");
  for (int it = 0; it < 200 && (hi - lo) > 1e-15 * (1.0 + std::abs(hi)); ++it) {
    double mid = 0.5 * (lo + hi), fm = f(mid);
    if (flo * fm <= 0.0) { hi = mid; fhi = fm; }
    else { lo = mid; flo = fm; }
  }
  return 0.5 * (lo + hi);
}

} // namespace

PairPotential PairPotential::gaussian_well(double a, double s) {
  if (!(a > 0.0) || !(s > 0.0))
    throw Error(Error::Code::InvalidArg, "gaussian well needs amplitude a>0 and width s>0");
  PairPotential p;
  p.family_ = Family::GaussianWell;
  p.a_ = a;
  p.s_ = s;
  p.r_scale_ = s;
  p.derive_constants();
  p.validate();
  return p;
}

PairPotential PairPotential::user_radial(std::function<WEval(double)> f, double r_scale) {
  if (!f) throw Error(Error::Code::InvalidArg, "user radial potential: missing callback");
  PairPotential p;
  p.family_ = Family::UserRadial;
  p.user_ = std::move(f);
  p.r_scale_ = r_scale;
  p.derive_constants();
  p.validate();
  return p;
}

WEval PairPotential::eval(double r) const {
  r = std::abs(r); // w is even
  if (family_ == Family::GaussianWell) {
    double q = r / s_;
    double e = std::exp(-q * q);
    return {a_ * (1.0 - e), a_ * 2.0 * r / (s_ * s_) * e,
            a_ * (2.0 / (s_ * s_) - 4.0 * r * r / (s_ * s_ * s_ * s_)) * e};
  }
  WEval v = user_(r);
  if (!std::isfinite(v.w) || !std::isfinite(v.wp) || !std::isfinite(v.wpp))
    throw Error(Error::Code::InvalidArg, "user radial potential: non-finite value at r=" + std::to_string(r));
  return v;
}

void PairPotential::derive_constants() {
  lambda_ = lambda_convexity_scan(*this);
  if (!(lambda_ < 0.0))
    throw Error(Error::Code::Numeric,
                "convexity constant must be negative for a bounded non-constant interaction; got " +
                    std::to_string(lambda_));

  // delta_prime: first positive root of w'(r) + lambda r = 0 — the radius up
  // to which the margin w(r)+lambda r^2/2 is increasing from 0
  auto g = [&](double r) { return eval(r).wp + lambda_ * r; };
  double hi = 1e-4 * r_scale_;
  while (g(hi) > 0.0 && hi < 100.0 * r_scale_) hi *= 1.5;
  if (g(hi) > 0.0)
    throw Error(Error::Code::Numeric, "no admissibility threshold found below 100 r_scale");
  delta_prime_ = bisect_root(g, hi / 1.5, hi);

  // c_w = inf over (0, 0.99 delta_prime] of margin(d)/d^2
  auto ratio = [&](double d) { return delta_margin(d) / (d * d); };
  double cw = ratio(0.99 * delta_prime_);
  const int n = 2000;
  for (int i = 1; i <= n; ++i) {
    double d = 0.99 * delta_prime_ * i / n;
    cw = std::min(cw, ratio(d));
  }
  double dmin = golden_min(ratio, 1e-6 * delta_prime_, 0.99 * delta_prime_);
  cw = std::min(cw, ratio(dmin));
  c_w_ = cw;
  if (!(c_w_ > 0.0))
    throw Error(Error::Code::Numeric, "quadratic lower-bound constant is not positive");
}

void PairPotential::validate() const {
  WEval z = eval(0.0);
  if (std::abs(z.w) > 1e-12 || std::abs(z.wp) > 1e-12)
    throw Error(Error::Code::InvalidArg, "interaction must satisfy w(0)=w'(0)=0");
  if (!(z.wpp > 0.0))
    throw Error(Error::Code::InvalidArg, "interaction must have w''(0)>0");
  const int n = 512;
  for (int i = 1; i <= n; ++i) {
    double r = 10.0 * r_scale_ * i / n;
    WEval e = eval(r);
    if (!(e.wp > 0.0))
      throw Error(Error::Code::InvalidArg,
                  "interaction must be strictly increasing in r>0; w'(" + std::to_string(r) +
                      ") = " + std::to_string(e.wp));
  }
}

double PairPotential::delta_margin(double delta) const {
  return eval(delta).w + 0.5 * lambda_ * delta * delta;
}

bool PairPotential::delta_admissible(double delta) const {
  if (!(delta > 0.0)) throw Error(Error::Code::InvalidArg, "delta must be positive");
  return delta_margin(delta) > 0.0;
}

double lambda_convexity_scan(const PairPotential& pot) {
  // documented scan: r in [0, 10 s], 1e4 points, then golden-section polish
  const int n = 10000;
  double scale = 10.0 * (pot.family() == PairPotential::Family::GaussianWell ? pot.width() : 1.0);
  double best = hessian_min(pot, 0.0), best_r = 0.0;
  for (int i = 1; i <= n; ++i) {
    double r = scale * i / n;
    double v = hessian_min(pot, r);
    if (v < best) { best = v; best_r = r; }
  }
  double lo = std::max(0.0, best_r - scale / n), hi = std::min(scale, best_r + scale / n);
  double r_polished = golden_min([&](double r) { return hessian_min(pot, r); }, lo, hi);
  return std::min(best, hessian_min(pot, r_polished));
}

} // namespace droplet
