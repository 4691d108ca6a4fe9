#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sellab/error.hpp"

namespace sellab {

using RealFn = std::function<double(double)>;

constexpr double kInf = std::numeric_limits<double>::infinity();

// ------------------------------------------------------------------ types

struct Convergent {
  double value;
  double err;
};
struct Divergent {
  double growth_exponent;  // fitted log-log slope s of the integrand
};
struct Inconclusive {
  std::string diagnostics;
  double slope = std::numeric_limits<double>::quiet_NaN();
};

/// Outcome of an improper-integral classification.
using ConvergenceVerdict = std::variant<Convergent, Divergent, Inconclusive>;

inline bool is_convergent(const ConvergenceVerdict& v) {
  return std::holds_alternative<Convergent>(v);
}
inline bool is_divergent(const ConvergenceVerdict& v) {
  return std::holds_alternative<Divergent>(v);
}
std::string describe(const ConvergenceVerdict& v);

enum class Classification { Bounded, EntireLarge, BoundaryBlowup, NoSolution, Undetermined };
std::string to_string(Classification c);

/// Grid solution of a radial problem.
struct RadialSolution {
  int dimension = 1;
  std::vector<double> r;
  std::vector<double> u;
  std::vector<double> du;
  std::vector<double> v;   // second component for systems, else empty
  std::vector<double> dv;
  std::vector<double> u_err;  // per-point error estimate when available
  Classification classification = Classification::Undetermined;
  std::optional<double> blowup_radius;
  int iterations = 0;
  double residual = 0.0;
  std::vector<std::string> notes;

  double sup_u() const;
};

// -------------------------------------------------------------- quadrature

struct QuadResult {
  double value;
  double err;
  int intervals;
};

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.
/// Never evaluates the endpoints. Throws NumericalError if `max_intervals`
/// is exhausted before err <= max(abs_tol, rel_tol*|value|).
QuadResult gauss_kronrod(const RealFn& f, double a, double b, double abs_tol, double rel_tol,
                         int max_intervals = 4000);

/// Finite integral with endpoint-singularity handling: each half of [a,b]
/// is mapped by a power substitution graded toward an endpoint whose
/// integrand blows up. err <= tol*(1+|value|) on success.
/// Throws NumericalError for a non-integrable endpoint (local power <= -1)
/// or when subdivision is exhausted.
QuadResult integrate_finite(const RealFn& f, double a, double b, double tol);

// ------------------------------------------------------- sequence limits

struct LimitEstimate {
  double value;
  double err;
};

/// Levin u-transform of the partial sums `s` (terms are successive
/// differences). Uses the last `order+1` (or fewer) entries; err is the
/// change between the two highest orders.
LimitEstimate levin_u(std::span<const double> s, int order = 12);

/// Aitken delta-squared on three consecutive values.
double aitken(double x0, double x1, double x2);

/// Richardson extrapolation of samples f(h_k) with h_k = h0 * ratio^k
/// assuming f(h) = L + c h^p + ... with known leading exponent p.
LimitEstimate richardson(std::span<const double> values, double ratio, double p);

// -------------------------------------------------------- classification

struct TailOptions {
  int max_doublings = 48;
  double t_limit = kInf;   // stop sampling beyond this abscissa
  double delta = 0.05;     // half-width of the borderline slope band
  int fallback_panels = 40;
  int slope_points = 10;
};

/// Classify int_a^inf fn(t) dt.
ConvergenceVerdict classify_tail_integral(const RealFn& fn, double a, double tol,
                                          const TailOptions& opt = {});

/// Classify int_0^b fn(t) dt (singularity at the origin). Divergent carries
/// the local power of fn at 0.
ConvergenceVerdict classify_origin_integral(const RealFn& fn, double b, double tol,
                                            const TailOptions& opt = {});

/// Least-squares slope of log|y| against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

// ------------------------------------------------------------ root finding

/// Solve fn(x) = target for fn monotone on [lo, hi] (either direction).
/// If the bracket does not straddle the target, hi is moved to
/// lo + 2*(hi-lo) up to 60 times. Throws NumericalError if no bracket.
double find_root_monotone(const RealFn& fn, double target, double lo, double hi, double tol);

// ------------------------------------------------------------------ ODEs

template <std::size_t D>
using Vec = std::array<double, D>;

struct OdeOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h0 = 0.0;            // 0: automatic
  double h_max = kInf;
  long max_steps = 2'000'000;
};

enum class OdeStatus { Completed, Stopped, StepUnderflow };

/// One accepted Dormand-Prince step with its dense-output polynomial.
template <std::size_t D>
struct DenseStep {
  double x0, x1;
  Vec<D> y0, y1;
  std::array<Vec<D>, 5> rc;
  Vec<D> operator()(double x) const {
    const double h = x1 - x0;
    const double th = h == 0.0 ? 0.0 : (x - x0) / h;
    const double th1 = 1.0 - th;
    Vec<D> y{};
    for (std::size_t i = 0; i < D; ++i) {
      y[i] = rc[0][i] + th * (rc[1][i] + th1 * (rc[2][i] + th * (rc[3][i] + th1 * rc[4][i])));
    }
    return y;
  }
};

template <std::size_t D>
struct OdeOutcome {
  OdeStatus status;
  double x;
  Vec<D> y;
  long steps;
};

/// Adaptive Dormand-Prince 5(4) integrator with dense output.
/// `rhs(x, y) -> Vec<D>`; `observer(const DenseStep<D>&) -> bool` is called
/// after every accepted step and may return false to stop. Stage
/// evaluations that throw DomainError or produce non-finite values reject
/// the step and shrink h.
template <std::size_t D, class Rhs, class Observer>
OdeOutcome<D> integrate_ode(Rhs&& rhs, double x0, Vec<D> y0, double x_end,
                            const OdeOptions& opt, Observer&& observer);

// ----------------------------------------------------------- radial IVP

/// G(r, u, u') in u'' + (N-1)/r u' = G.
using RadialRhs = std::function<double(double, double, double)>;

struct RadialIvpOptions {
  double blowup_threshold = 1e8;
  bool signed_mode = false;              // allow u0 <= 0
  std::vector<double> output_radii;      // record here; empty: every step
  double start_fraction = 1e-6;          // series start radius / r_max
};

/// Integrate u'' + (N-1)/r u' = G(r,u,u') from the origin with u(0)=u0,
/// u'(0)=du0. Stops with BoundaryBlowup(R) when |u| or |u'| exceeds the
/// threshold; R is located on the dense output.
RadialSolution integrate_radial_ivp(const RadialRhs& rhs, double u0, double du0, int N,
                                    double r_max, double tol,
                                    const RadialIvpOptions& opt = {});

// --------------------------------------------------------- interpolation

/// Fritsch-Carlson monotone piecewise cubic. Evaluation outside
/// [x.front(), x.back()] throws PreconditionError.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(std::vector<double> x, std::vector<double> y);
  double operator()(double x) const;
  double derivative(double x) const;
  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }

 private:
  std::size_t locate(double x) const;
  std::vector<double> x_, y_, m_;
};

/// Cumulative integral of tabulated values on a strictly increasing grid
/// using the piecewise cubic Lagrange interpolant (4-point stencils).
std::vector<double> cumulative_integral(std::span<const double> x, std::span<const double> f);

/// Geometric grid with points_per_octave points per factor 2 from hi down
/// to lo, returned ascending.
std::vector<double> geometric_grid(double lo, double hi, int points_per_octave);

}  // namespace sellab

#include "sellab/detail/dopri5.hpp"
