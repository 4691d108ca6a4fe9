#pragma once

// Regular variation, growth constants of a nonlinearity, class-K functions
// and the closed-form blow-up rate constants.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sellab/expr.hpp"
#include "sellab/numerics.hpp"

namespace sellab {

/// A limit computed from samples: finite, +infinity, or not stabilized.
struct Limit {
  enum class Kind { Finite, PlusInfinity, Unavailable };
  Kind kind = Kind::Unavailable;
  double value = std::numeric_limits<double>::quiet_NaN();
  double err = kInf;

  bool finite() const { return kind == Kind::Finite; }
  static Limit of(double v, double e) { return {Kind::Finite, v, e}; }
  static Limit infinite() { return {Kind::PlusInfinity, kInf, 0.0}; }
  static Limit unavailable(double last) { return {Kind::Unavailable, last, kInf}; }
};
std::string describe(const Limit& l);

/// Antiderivative F(u) = int_0^u f, backed by a cumulative table at the
/// knots 2^k plus one quadrature from the nearest knot.
class Antiderivative {
 public:
  Antiderivative() = default;
  explicit Antiderivative(expr::ScalarFn f);
  double operator()(double u) const;

 private:
  expr::ScalarFn f_;
  int k_min_ = 0;
  std::vector<double> knots_;  // F(2^(k_min + i))
};

struct Singularity {
  double alpha;  // g(s) ~ C0 s^-alpha as s -> 0+
  double C0;
  double eta0;   // g(s) <= C0 s^-alpha checked on (0, eta0]
};

struct Nonlinearity {
  expr::ScalarFn f;
  expr::ScalarFn fprime;
  Antiderivative F;
  Limit m;        // lim f(s)/s
  Limit Lambda;   // sup_{s>=1} f(s)/s
  Limit theta;    // lim u f'(u)/f(u)
  Limit gamma;    // lim (F/f)'
  Limit rho;      // index of regular variation of f'
  std::optional<Singularity> singular;
  std::vector<std::string> notes;
};

struct RvIndex {
  double value;
  double spread;
  bool regular;  // spread <= 0.05
};

/// Index of regular variation from log(fn(xi u)/fn(u))/log xi with
/// xi in {2,4,8}, u in {u_max/8, u_max/4, u_max/2}.
RvIndex rv_index(const RealFn& fn, double u_max = 1e8);

/// Throws PreconditionError if f is not positive (and, when
/// `require_monotone`, nondecreasing) on the sampled grid of (0, u_max].
Nonlinearity analyze_nonlinearity(const std::string& f_src, double u_max = 1e8,
                                  bool require_monotone = true);
Nonlinearity analyze_nonlinearity(const expr::ScalarFn& f, double u_max = 1e8,
                                  bool require_monotone = true);

/// Local behaviour g(s) ~ C0 s^-alpha at the origin; nullopt when g stays
/// bounded there.
std::optional<Singularity> origin_singularity(const expr::ScalarFn& g);

/// int_1^inf F(t)^{-1/2} dt.
ConvergenceVerdict keller_osserman(const Nonlinearity& f, double tol);

/// int_1^inf dt / f(t).
ConvergenceVerdict necessary_condition_entire(const Nonlinearity& f, double tol = 1e-8);

struct EllLimits {
  double ell0, ell0_err;
  double ell1, ell1_err;
  std::vector<double> t;       // sample abscissae 10^-j
  std::vector<double> ratio;   // int_0^t k / k(t)
  std::vector<double> slope;   // derivative of the ratio
};

struct KRatio {
  double ratio;  // int_0^t k / k(t)
  double slope;  // d/dt of the ratio
  double lnk;    // ln k(t)
};

/// Ratio integral at t from ln k; nullopt when k varies too fast around t
/// to be resolved in double precision.
std::optional<KRatio> k_ratio(const expr::ScalarFn& lnk, double t);

/// Limits at 0+ of r(t) = int_0^t k / k(t) and of r'(t). Evaluated in
/// logarithmic form, so k may underflow.
EllLimits ell_limits(const expr::ScalarFn& k, double nu);

enum class KKind { User, ExpA, InvS, InvLnS, Power };
std::string to_string(KKind k);

struct KFunction {
  expr::ScalarFn k;
  double nu = 1.0;
  double ell0 = 0.0;
  double ell1 = 0.0;
  double ell1_err = 0.0;
  std::optional<double> ell1_predicted;
  std::optional<double> zeta;
  std::optional<double> ell_star;
  KKind kind = KKind::User;
  double alpha = 0.0;  // for Power
};

/// k(t) = exp(-S(1/t)), 1/S(1/t) or 1/ln S(1/t) on (0, 1/D) with predicted
/// l1 = 0, 1/(q+2), 1 where q is the index of S'. Throws when q <= -1 or
/// when the measured l1 misses the prediction.
KFunction make_k(KKind kind, const std::string& S_src, double D);

/// k(t) = t^alpha on (0, nu).
KFunction power_k(double alpha, double nu = 1.0);

/// User-supplied k with measured limits.
KFunction user_k(const std::string& k_src, double nu);

/// ((2 + l1 rho) / (c (2 + rho)))^(1/rho).
double xi0_power(double rho, double ell1, double c);

/// A(xi) = lim f(xi u)/(xi f(u)) sampled at u = 1e8 (checked against 1e7).
double growth_ratio(const expr::ScalarFn& f, double xi);

/// Root of A(xi) = (K'(0)(1 - 2 gamma) + 2 gamma)/c on (1e-6, 1e6).
double xi0_via_A(const Nonlinearity& f, double gamma, double Kprime0, double c);

enum class TwoTermCase { PurePower, EtaNonzero, EtaZeroTau };

struct TwoTermSpec {
  double rho = 1.0;
  double zeta = 1.0;
  double theta = 1.0;
  double ell_lower = 0.0;   // l_star of the class K_{0,zeta}
  double ell_upper = 0.0;   // l^star of the slowly varying correction
  double c_tilde = 0.0;
  TwoTermCase kind = TwoTermCase::PurePower;
};

struct TwoTerm {
  double varpi;
  double chi;
  double tau1;
  bool tie_warning;  // |theta - zeta| < 1e-9, Heaviside(0) = 1/2 used
};

double heaviside(double x);
TwoTerm chi_two_term(const TwoTermSpec& spec);

}  // namespace sellab
