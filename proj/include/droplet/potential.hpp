#pragma once
#include <functional>
#include <stdexcept>
#include <string>

namespace droplet {

// error carrying a machine-usable code alongside the message
class Error : public std::runtime_error {
public:
  enum class Code { InvalidArg, Config, Numeric, Io, InsufficientData };
  Error(Code c, const std::string& msg) : std::runtime_error(msg), code(c) {}
  Code code;
};

struct WEval {
  double w, wp, wpp; // value, first, second radial derivative
};

// Radial pair interaction w(r): even, bounded, smooth, w(0)=w'(0)=0 and
// w'(r)>0 for r>0. The convexity constant lambda = inf_r min(w'', w'/r) < 0,
// the admissibility threshold delta_prime, and the quadratic lower-bound
// constant c_w are derived at construction.
class PairPotential {
public:
  enum class Family { GaussianWell, UserRadial };

  // w(r) = a (1 - exp(-r^2/s^2))
  static PairPotential gaussian_well(double a = 1.0, double s = 1.0);

  // closed-form callback returning {w, w', w''}; validated on a sample grid
  static PairPotential user_radial(std::function<WEval(double)> f, double r_scale = 1.0);

  WEval eval(double r) const;

  Family family() const { return family_; }
  double amplitude() const { return a_; }
  double width() const { return s_; }
  double lambda() const { return lambda_; }           // convexity constant (< 0)
  double c_w() const { return c_w_; }                 // margin(d)/d^2 lower bound
  double delta_prime() const { return delta_prime_; } // admissibility threshold

  // w(delta) + lambda delta^2 / 2 (positive on the admissible range)
  double delta_margin(double delta) const;
  bool delta_admissible(double delta) const;

private:
  PairPotential() = default;
  void derive_constants();
  void validate() const;

  Family family_ = Family::GaussianWell;
  double a_ = 1.0, s_ = 1.0;
  std::function<WEval(double)> user_;
  double r_scale_ = 1.0; // search scale for derived constants (UserRadial)
  double lambda_ = 0.0, c_w_ = 0.0, delta_prime_ = 0.0;
};

// exposed for cross-checks in tests: grid + golden-section minimisation of
// min(w''(r), w'(r)/r) over (0, 10 s]
double lambda_convexity_scan(const PairPotential& pot);

} // namespace droplet
