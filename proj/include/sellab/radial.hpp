#pragma once

// Constructive radial solvers: Picard iteration for entire solutions with a
// gradient term, alternating iteration for systems, boundary blow-up
// solutions from the u = n boundary scheme, and residual verification.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sellab/karamata.hpp"
#include "sellab/numerics.hpp"
#include "sellab/profile.hpp"

namespace sellab {

/// Radial potential p(r), or a non-radial potential described by its
/// envelopes phi(r) = max_{|x|=r} p and psi(r) = min_{|x|=r} p.
struct RadialPotential {
  expr::ScalarFn phi;
  expr::ScalarFn psi;

  static RadialPotential radial(const expr::ScalarFn& p) { return {p, p}; }
  static RadialPotential radial(const std::string& src);
  static RadialPotential envelopes(const std::string& phi_src, const std::string& psi_src);

  bool is_radial() const;
  double gap(double r) const { return phi(r) - psi(r); }
};

/// Psi(r) = exp(Lambda_N int_0^r s psi(s) ds), tabulated on doubling knots.
class PsiWeight {
 public:
  PsiWeight(expr::ScalarFn psi, double Lambda_N);
  double operator()(double r) const;
  double log(double r) const;

 private:
  expr::ScalarFn psi_;
  double Lambda_N_;
  std::vector<double> knots_;  // int_0^{2^(k_min+i)} s psi
  int k_min_ = -30;
};

/// Integrand r gap(r) Psi(r) of the slow-variation condition.
RealFn slow_variation_integrand(const RadialPotential& pot, double Lambda_N);

/// Classifies int_0^inf r gap(r) Psi(r) dr; Convergent(0) for radial p.
ConvergenceVerdict check_slow_variation(const RadialPotential& pot, double Lambda_N, double tol);

struct LargeCondition {
  ConvergenceVerdict outer;           // int_1^inf e^-t t^(1-N) int_0^t e^s s^(N-1) psi
  ConvergenceVerdict bound;           // (N-2)^-1 int_0^inf t psi(t) dt
};

/// e^-t t^(1-N) int_0^t e^s s^(N-1) psi(s) ds, with the small-t series.
double large_condition_integrand(const expr::ScalarFn& psi, int N, double t);

LargeCondition check_large_condition(const expr::ScalarFn& psi, int N, double tol);

struct PicardOptions {
  int panels = 2048;
  int max_iterations = 200;
  int max_refinements = 3;
  std::optional<expr::ScalarFn> phi;  // supplies the ordering check
  double Lambda = std::numeric_limits<double>::quiet_NaN();  // default: f.Lambda
};

struct PicardResult {
  RadialSolution w;
  std::optional<RadialSolution> v;  // solution with phi and central value 1
  double M = 0.0;                   // growth exponent Lambda_N max t psi(t)
  bool monotone = true;
  bool growth_bound = true;
  double growth_ratio = 0.0;        // w(R)/w(R/2)
  ConvergenceVerdict large_condition = Inconclusive{"not evaluated"};
  std::optional<double> b_star;     // ordering constant
  std::optional<bool> ordered;      // v <= w at every grid point
  std::vector<double> sup_change;   // per iteration
};

/// w_1 = b0, w_{k+1}(r) = b0 + int_0^r e^-t t^(1-N) int_0^t e^s s^(N-1) psi f(w_k).
/// Throws NumericalError when an iterate decreases or the growth bound
/// w_k <= b0 e^(M r) fails.
PicardResult picard_gradient_entire(const expr::ScalarFn& psi, const Nonlinearity& f, double b0,
                                    double R, int N, double tol, const PicardOptions& opt = {});

struct SystemProblem {
  RadialPotential p, q;
  Nonlinearity f, g;  // Delta u = p g(v), Delta v = q f(u)
  double a = 1.0, b = 1.0;
};

struct SystemOptions {
  int panels = 2048;
  int max_iterations = 400;
};

struct SystemResult {
  RadialSolution sol;  // u in u/du, v in v/dv
  ConvergenceVerdict p_condition = Inconclusive{"not evaluated"};  // int t p
  ConvergenceVerdict q_condition = Inconclusive{"not evaluated"};
  Classification predicted = Classification::Undetermined;
  Classification observed = Classification::Undetermined;
  bool monotone = true;
  bool lower_bound = true;  // u >= a + g(b) A(r), v >= b + f(a) B(r)
  bool h3_holds = true;
  double growth_ratio = 0.0;
};

SystemResult solve_system(const SystemProblem& sys, double R, int N, double tol,
                          const SystemOptions& opt = {});

/// int_0^r t^(1-N) int_0^t s^(N-1) p(s) ds dt on the given radii.
std::vector<double> radial_double_integral(const expr::ScalarFn& p, int N,
                                           const std::vector<double>& r);

/// (1 + m Cq) e^(m^2 Cp Cq).
double lipschitz_constant(double Cp, double Cq, double m_lip);

/// Cp = (N-2)^-1 int_0^inf t p(t) dt; throws when the integral diverges.
double potential_constant(const expr::ScalarFn& p, int N, double tol = 1e-8);

/// max |fn'| over [lo, hi] sampled on 2000 points.
double lipschitz_on_range(const expr::ScalarFn& fn, double lo, double hi);

enum class DomainKind { Ball, Annulus, Exterior, WholeSpace };

/// Ball(R): u = n on r = R. Annulus(R0, R): u = n on both spheres.
/// Exterior(R0, R): u = n on r = R0, u = outer_value on r = R.
/// WholeSpace(R_max) is accepted by the type but not by boundary_blowup.
struct LogisticProblem {
  double a_lin = 0.0;
  expr::ScalarFn b;
  Nonlinearity f;
  DomainKind domain = DomainKind::Ball;
  double R0 = 0.0;
  double R = 1.0;
  double outer_value = 1.0;
  int N = 1;
  std::optional<double> omega0_radius;  // b vanishes on the ball of this radius
  ProfileVariant b_normalization = ProfileVariant::KIntegrand;  // b ~ c k^2 or b ~ c k
};

struct BlowupOptions {
  std::vector<double> n_levels;   // default 10 * 2^j, j = 0..8
  double d_min_fraction = 1e-3;   // smallest boundary distance / length
  int points_per_octave = 8;
  int jobs = 0;                   // 0: OpenMP default, 1: serial
};

/// Distance to the blow-up boundary of the problem's domain.
double boundary_distance(const LogisticProblem& prob, double r);

/// Solves the u = n boundary problems by shooting from the regular side
/// and extrapolates across levels with Aitken's delta-squared. u_err holds
/// the change between the last two accelerated values.
RadialSolution boundary_blowup(const LogisticProblem& prob, double tol,
                               const BlowupOptions& opt = {});

/// Level solutions before extrapolation, one per n.
std::vector<RadialSolution> boundary_blowup_levels(const LogisticProblem& prob, double tol,
                                                   const BlowupOptions& opt,
                                                   std::vector<double>* radii = nullptr);

/// sup over r_grid of |u'' + (N-1)/r u' - G(r, u, u')| with exact
/// derivatives of u.
double residual(const std::string& u_src, const RadialRhs& rhs, int N,
                const std::vector<double>& r_grid);

struct RateRow {
  double d;
  double u_over_h;
  double u_over_xi0h;
};

struct RateTable {
  std::vector<RateRow> rows;  // nearest the boundary first
  double limit = 0.0;         // extrapolated u/(xi0 h)
  double drift = 0.0;
};

/// Ratios at the 10 resolved grid points nearest the boundary. Refuses a
/// profile whose variant does not match the problem's b normalization.
RateTable measure_boundary_rate(const LogisticProblem& prob, const RadialSolution& sol,
                                const BlowupProfile& profile);

std::string solution_csv(const RadialSolution& sol);

}  // namespace sellab
