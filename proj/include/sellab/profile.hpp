#pragma once

// Boundary blow-up profile h defined by the tail identity
//   int_{h(t)}^inf (2F(s))^{-1/2} ds = int_0^t k   (or int_0^t sqrt(k)),
// and the sub-solution profile h'' = g(h), h(0) = h'(0) = 0.

#include <optional>
#include <string>
#include <vector>

#include "sellab/karamata.hpp"

namespace sellab {

/// kIntegrand pairs with b ~ c k^2 at the boundary, SqrtKIntegrand with
/// b ~ c k. The two are never converted into each other.
enum class ProfileVariant { KIntegrand, SqrtKIntegrand };
std::string to_string(ProfileVariant v);
ProfileVariant parse_profile_variant(const std::string& s);

struct ProfileOptions {
  double c = 1.0;                  // b ~ c k^2 (or c k)
  std::optional<double> xi0;       // override the computed rate constant
  double ko_tol = 1e-4;
  double root_tol = 1e-13;         // on ln Phi
};

class BlowupProfile {
 public:
  ProfileVariant variant = ProfileVariant::KIntegrand;
  Nonlinearity f;
  KFunction k;
  double c = 1.0;
  double xi0 = 1.0;
  double kappa_ell1 = 0.0;         // l1 of the integrand (k or sqrt k)
  std::optional<double> chi;
  std::optional<double> varpi;
  // table, ascending in t
  std::vector<double> t, h, hp, hpp;
  double max_roundtrip_err = 0.0;

  /// Phi(y) = int_y^inf (2F(s))^{-1/2} ds.
  double Phi(double y) const;
  /// ln int_0^t kappa with kappa = k or sqrt k.
  double log_kappa_integral(double t) const;
  /// h(t) by monotone interpolation in (ln t, ln h); throws outside the table.
  double operator()(double t) const;
  /// h(t) by root-finding on the defining identity.
  double solve(double t) const;
  double kappa(double t) const;
  double kappa_prime(double t) const;

  /// Rebuilds the interpolant from the table.
  void finalize();

  expr::ScalarFn ln_kappa;  // ln k or ln sqrt k
  MonotoneCubic interp;     // ln h against ln t
};

/// Throws PreconditionError unless keller_osserman(f) is Convergent;
/// NumericalError when the root bracket is exhausted.
BlowupProfile build_profile(const Nonlinearity& f, const KFunction& k, ProfileVariant variant,
                            std::vector<double> t_grid, const ProfileOptions& opt = {});

/// Geometric table t_j = nu 2^-j for j = 1..levels.
std::vector<double> profile_grid(double nu, int levels);

enum class RateOrder { One, Two };

/// xi0 h(d) or xi0 h(d) (1 + chi d^varpi).
double predicted_rate(const BlowupProfile& p, double d, RateOrder order);

struct ProfileChecks {
  std::vector<double> t;
  std::vector<double> h2_ratio;   // h'' / (kappa^2 f(h))
  std::vector<double> h_over_hpp;
  std::vector<double> hp_over_hpp;
  double h2_predicted;            // (2 + rho l1)/(2 + rho)
  bool decreasing;                // h strictly decreasing along the table
};

ProfileChecks check_profile(const BlowupProfile& p);

std::string profile_csv(const BlowupProfile& p);

struct OdeProfile {
  std::vector<double> t, h, hp, hpp;
  double alpha = 0.0;  // g(s) ~ C0 s^-alpha
  double C0 = 0.0;
  double C = 0.0;      // h ~ C t^(2/(1+alpha))
  double beta = 2.0;
};

/// Integrates h' = sqrt(2 G(h)), G(h) = int_0^h g, from the local power
/// solution at t0 and records h, h', h'' = g(h) on a geometric grid of
/// [t_min, t_max]. Throws PreconditionError when g is not integrable at 0.
OdeProfile profile_ode_g(const Nonlinearity& g, double t_max, double t_min = 0.0,
                         int points_per_octave = 8);

struct OdeProfileChecks {
  bool has_bound;       // t h' <= 2 h
  bool h_increasing;
  bool hp_increasing;
  bool hpp_nonincreasing;
  double c1, c2;        // (h')^p <= c1 g(h) + c2 with c1 = 2h(eta), c2 = h'(eta)^2 + 1
  bool lh_bound;        // for p in {0.5, 1, 1.5, 2}
  double power_bound;   // sup h / t^beta on the grid
};

OdeProfileChecks check_ode_profile(const OdeProfile& p, const Nonlinearity& g);

std::string ode_profile_csv(const OdeProfile& p);

}  // namespace sellab
