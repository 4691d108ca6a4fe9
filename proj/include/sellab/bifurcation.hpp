#pragma once

// First Dirichlet eigenvalues by shooting, singular Lane-Emden-Fowler
// problems by shooting on the centre value, lambda sweeps against
// lambda* = lambda_1/m, the Gelfand reduction for quadratic convection and
// the Young constant for 1 < p < 2.

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sellab/karamata.hpp"
#include "sellab/numerics.hpp"
#include "sellab/radial.hpp"

namespace sellab {

/// N = 1 geometry: the symmetric interval (-R, R) with phi'(0) = 0, or the
/// interval (0, R) with Dirichlet data at both ends.
enum class EigenMode { Symmetric, Interval };
std::string to_string(EigenMode m);
EigenMode parse_eigen_mode(const std::string& s);

struct EigenResult {
  double lambda1 = 0.0;
  int N = 1;
  double R = 1.0;
  EigenMode mode = EigenMode::Symmetric;
  std::vector<double> r, phi;  // phi(0) = 1 (symmetric) or max phi = 1 (interval)
  double phi_end = 0.0;        // phi(R)
  double residual = 0.0;       // integral-form residual of -Delta phi = lambda phi
  double scaling_err = 0.0;    // |lambda1(R) R^2 - lambda1(1)| / lambda1(1)
};

/// Bisection on lambda for the first zero of the shooting solution at R.
EigenResult lambda1_ball(int N, double R, EigenMode mode = EigenMode::Symmetric);

/// First eigenvalue of the ball of radius R0; +infinity when R0 = 0.
double lambda_inf_1(int N, double R0);

/// -Delta u = lambda f(u) + a g(u)                      (Linear)
/// -Delta u + K g(u) = lambda f(u) + mu source          (Absorption)
/// -Delta u = g(u) + lambda |u'|^grad_p + mu f(u)       (Convection)
enum class LefMode { Linear, Absorption, Convection };
std::string to_string(LefMode m);
LefMode parse_lef_mode(const std::string& s);

struct LEFProblem {
  double lambda = 0.0;
  double mu = 0.0;
  Nonlinearity f;
  expr::ScalarFn g;  // singular at 0
  RadialPotential K_pot, a_pot, source;
  double grad_p = 0.0;
  LefMode mode = LefMode::Linear;
  int N = 1;
  double R = 1.0;
  EigenMode n1_mode = EigenMode::Interval;

  double lambda1() const;
  double m() const;            // lim f(s)/s
  double lambda_star() const;  // lambda1/m, +infinity when m = 0
};

/// Builds a problem with a = K = source = 1 and analyses f.
LEFProblem make_lef(LefMode mode, const std::string& f_src, const std::string& g_src, int N,
                    double R = 1.0, EigenMode n1_mode = EigenMode::Interval);

/// Right-hand side G(r, u, u') of -Delta u = G.
using LefRhs = std::function<double(double, double, double)>;

struct LefOptions {
  double eps_b = 1e-6;        // boundary cut
  double s_min = 1e-6;
  double s_max = 1e6;
  int probes = 60;            // log-spaced centre values
  double tol = 1e-11;         // integrator rtol
  int grid_points = 401;
  int regularize_levels = 0;  // runs with u = 1/k on the boundary, k = 2^j
  double d_band = 0.2;
};

struct LefResult {
  bool solved = false;
  RadialSolution sol;   // r is the distance from the centre, or x for the interval mode
  double center = 0.0;
  double sup_norm = 0.0;
  double shoot_residual = 0.0;  // |F| with the cut halved
  bool flagged = false;         // the halved cut moved the residual by >= 1e-6
  double c1 = 0.0, c2 = 0.0;    // c1 d <= u <= c2 d
  bool d_bounds = false;
  bool monotone_map = true;
  std::vector<std::pair<double, double>> probes;  // (s, F(s))
  std::vector<double> k_levels;
  std::vector<RadialSolution> regularized;
  bool regularized_monotone = true;  // decrease in k, above the singular solution
};

/// Shooting on the centre value for -Delta u = G, u = 0 on the boundary.
LefResult solve_dirichlet(const LefRhs& G, int N, double R, EigenMode n1_mode,
                          const LefOptions& opt = {});

LefResult solve_lef(const LEFProblem& prob, const LefOptions& opt = {});

enum class SweepStatus { Solved, NoSolution, Failed };
std::string to_string(SweepStatus s);

struct SweepPoint {
  double lambda = 0.0;
  SweepStatus status = SweepStatus::Failed;
  double sup_norm = 0.0;
  double center = 0.0;
  std::string message;
};

struct BifurcationDiagram {
  std::vector<SweepPoint> points;
  std::optional<double> lambda_star_empirical;  // last solved before the first NoSolution
  std::optional<std::pair<double, double>> bracket;
  double lambda_star_theoretical = kInf;
  bool monotone = true;  // centre values strictly increase along solved points
};

/// jobs = 1 is the serial reference.
BifurcationDiagram sweep(const LEFProblem& prob_template, const std::vector<double>& lambda_grid,
                         int jobs = 0, const LefOptions& opt = {});

std::string diagram_csv(const BifurcationDiagram& d);
std::string eigen_csv(const EigenResult& e);

bool gelfand_solvable(double lambda, double mu, double a_lim, double lambda1);

enum class GelfandDirection { Forward, Back };

/// v = e^(lambda u) - 1 and back, with v' = lambda e^(lambda u) u'.
RadialSolution gelfand_transform(const RadialSolution& sol, double lambda, GelfandDirection dir);

/// Phi_lambda(v) = lambda (v + 1) g(ln(v + 1)/lambda) + lambda mu (v + 1).
expr::ScalarFn gelfand_rhs(const expr::ScalarFn& g, double lambda, double mu);

/// Solves -Delta v = Phi_lambda(v) and maps back to u.
LefResult solve_gelfand(const expr::ScalarFn& g, double lambda, double mu, int N, double R,
                        EigenMode n1_mode, const LefOptions& opt = {});

struct YoungConstant {
  double C = 0.0;
  double cc_lhs = 0.0;          // a C^(p/2) + C^(p-1)
  double inq_max = 0.0;         // max_s s^p - C^(p/2) s^2 - C^(p/2-1)
  double inq_derived_max = 0.0; // max_s s^p - C^(p/2-1) s^2 - C^(p/2)
  bool inq_holds = false;
};

/// Largest C = 2^-j with 2 (a C^(p/2) + C^(p-1)) < lambda1, checked on
/// s in a log grid of [1e-6, 1e6].
YoungConstant young_constant(double a_lim, double p, double lambda1);

}  // namespace sellab
