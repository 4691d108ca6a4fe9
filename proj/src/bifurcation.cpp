#include "sellab/bifurcation.hpp"

#include <algorithm>
#include <cmath>

#include "sellab/io.hpp"
#include "sellab/parallel.hpp"

namespace sellab {

std::string to_string(EigenMode m) { return m == EigenMode::Symmetric ? "symmetric" : "interval"; }

EigenMode parse_eigen_mode(const std::string& s) {
  if (s == "symmetric") return EigenMode::Symmetric;
  if (s == "interval") return EigenMode::Interval;
  throw PreconditionError("unknown N=1 mode '" + s + "' (expected symmetric or interval)");
}

std::string to_string(LefMode m) {
  switch (m) {
    case LefMode::Linear: return "linear";
    case LefMode::Absorption: return "absorption";
    case LefMode::Convection: return "convection";
  }
  return "?";
}

LefMode parse_lef_mode(const std::string& s) {
  if (s == "linear") return LefMode::Linear;
  if (s == "absorption") return LefMode::Absorption;
  if (s == "convection") return LefMode::Convection;
  throw PreconditionError("unknown lef mode '" + s + "' (expected linear, absorption, convection)");
}

std::string to_string(SweepStatus s) {
  switch (s) {
    case SweepStatus::Solved: return "Solved";
    case SweepStatus::NoSolution: return "NoSolution";
    case SweepStatus::Failed: return "Failed";
  }
  return "?";
}

// -------------------------------------------------------------- eigenvalues

namespace {

struct EigStart {
  double r0;
  Vec<2> y0;
};

EigStart eig_start(double lambda, int N, double R, EigenMode mode) {
  if (N == 1) return {0.0, mode == EigenMode::Interval ? Vec<2>{0.0, 1.0} : Vec<2>{1.0, 0.0}};
  const double r = 1e-6 * R, l = lambda;
  return {r, {1.0 - l * r * r / (2.0 * N) + l * l * r * r * r * r / (8.0 * N * (N + 2)),
              -l * r / N + l * l * r * r * r / (2.0 * N * (N + 2))}};
}

// Integrates the eigen-ODE to R; true when phi reaches zero in (0, R].
template <class Obs>
bool eig_shoot(double lambda, int N, double R, EigenMode mode, Obs&& extra) {
  const EigStart s = eig_start(lambda, N, R, mode);
  auto rhs = [&](double r, const Vec<2>& y) -> Vec<2> {
    return {y[1], -lambda * y[0] - (N > 1 ? (N - 1) / r : 0.0) * y[1]};
  };
  bool crossed = false;
  auto obs = [&](const DenseStep<2>& st) {
    extra(st);
    if (st.y1[0] <= 0.0) {
      crossed = true;
      return false;
    }
    return true;
  };
  OdeOptions oo;
  oo.rtol = 1e-13;
  oo.atol = 1e-15;
  oo.h_max = R / 16.0;
  integrate_ode<2>(rhs, s.r0, s.y0, R, oo, obs);
  return crossed;
}

double lambda1_core(int N, double R, EigenMode mode) {
  auto none = [](const DenseStep<2>&) {};
  double lo = 0.0, hi = 1.0 / (R * R);
  for (int i = 0; i < 200 && !eig_shoot(hi, N, R, mode, none); ++i) {
    lo = hi;
    hi *= 2.0;
  }
  if (!eig_shoot(hi, N, R, mode, none)) throw NumericalError("lambda1_ball: no eigenvalue bracket");
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (eig_shoot(mid, N, R, mode, none) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

EigenResult lambda1_ball(int N, double R, EigenMode mode) {
  if (N < 1) throw PreconditionError("lambda1_ball: N must be >= 1");
  if (!(R > 0.0)) throw PreconditionError("lambda1_ball: R must be positive");
  if (mode == EigenMode::Interval && N != 1) {
    throw PreconditionError("lambda1_ball: interval mode needs N = 1");
  }
  EigenResult e;
  e.N = N;
  e.R = R;
  e.mode = mode;
  e.lambda1 = lambda1_core(N, R, mode);
  const double R2 = R == 1.0 ? 2.0 : 1.0;
  const double other = lambda1_core(N, R2, mode);
  e.scaling_err = std::fabs(e.lambda1 * R * R - other * R2 * R2) / (other * R2 * R2);

  // table on a uniform grid
  const int n = 2000;
  e.r.resize(n + 1);
  for (int i = 0; i <= n; ++i) e.r[i] = R * i / n;
  e.r.back() = R;
  std::vector<double> phi(n + 1), dphi(n + 1);
  const EigStart s = eig_start(e.lambda1, N, R, mode);
  phi[0] = mode == EigenMode::Interval ? 0.0 : 1.0;
  dphi[0] = mode == EigenMode::Interval ? 1.0 : 0.0;
  std::size_t next = 1;
  double last_x = s.r0, last_phi = s.y0[0], last_dphi = s.y0[1];
  auto rec = [&](const DenseStep<2>& st) {
    while (next <= static_cast<std::size_t>(n) && e.r[next] <= st.x1) {
      const Vec<2> v = st(e.r[next]);
      phi[next] = v[0];
      dphi[next] = v[1];
      ++next;
    }
    last_x = st.x1;
    last_phi = st.y1[0];
    last_dphi = st.y1[1];
  };
  eig_shoot(e.lambda1, N, R, mode, rec);
  // a crossing at the last step leaves the end point unrecorded
  for (; next <= static_cast<std::size_t>(n); ++next) {
    phi[next] = last_phi + last_dphi * (e.r[next] - last_x);
    dphi[next] = last_dphi;
  }
  double scale = 1.0;
  if (mode == EigenMode::Interval) scale = *std::max_element(phi.begin(), phi.end());
  for (int i = 0; i <= n; ++i) {
    phi[i] /= scale;
    dphi[i] /= scale;
  }
  e.phi = phi;
  e.phi_end = phi.back();

  // r^(N-1) phi'(r) - phi'(0)[N=1] + lambda int_0^r s^(N-1) phi = 0
  std::vector<double> w(n + 1);
  for (int i = 0; i <= n; ++i) w[i] = std::pow(e.r[i], N - 1) * phi[i];
  const std::vector<double> I = cumulative_integral(e.r, w);
  const double d0 = N == 1 ? dphi[0] : 0.0;
  double sc = 0.0;
  for (int i = 0; i <= n; ++i) sc = std::max(sc, std::fabs(std::pow(e.r[i], N - 1) * dphi[i]));
  for (int i = 0; i <= n; ++i) {
    const double res = std::pow(e.r[i], N - 1) * dphi[i] - d0 + e.lambda1 * I[i];
    e.residual = std::max(e.residual, std::fabs(res) / std::max(sc, 1.0));
  }
  return e;
}

double lambda_inf_1(int N, double R0) {
  if (R0 < 0.0) throw PreconditionError("lambda_inf_1: R0 must be >= 0");
  if (R0 == 0.0) return kInf;
  return lambda1_ball(N, R0).lambda1;
}

// --------------------------------------------------------- LEF problems

double LEFProblem::lambda1() const {
  return lambda1_ball(N, R, N == 1 ? n1_mode : EigenMode::Symmetric).lambda1;
}

double LEFProblem::m() const {
  if (f.m.finite()) return f.m.value;
  if (f.m.kind == Limit::Kind::PlusInfinity) return kInf;
  return std::numeric_limits<double>::quiet_NaN();
}

double LEFProblem::lambda_star() const {
  const double mm = m();
  if (!(mm > 0.0)) return kInf;
  return lambda1() / mm;
}

LEFProblem make_lef(LefMode mode, const std::string& f_src, const std::string& g_src, int N,
                    double R, EigenMode n1_mode) {
  LEFProblem p;
  p.mode = mode;
  p.f = analyze_nonlinearity(f_src);
  p.g = expr::ScalarFn::parse(g_src, 0.0);
  p.K_pot = RadialPotential::radial("1");
  p.a_pot = RadialPotential::radial("1");
  p.source = RadialPotential::radial("1");
  p.N = N;
  p.R = R;
  p.n1_mode = n1_mode;
  return p;
}

namespace {

struct LevelShot {
  double F = 0.0;      // zero position minus the half-width
  double r_hit = kInf;
  double du_hit = 0.0;
};

class Shooter {
 public:
  Shooter(const LefRhs& G, int N, double half, double tol) : G_(G), N_(N), half_(half), tol_(tol) {}

  // Stops where u reaches `level`; the zero of u - target is placed by the
  // linear model through that point.
  LevelShot shoot(double s, double level, double target, const std::vector<double>* rec = nullptr,
                  std::vector<double>* u = nullptr, std::vector<double>* du = nullptr) const {
    const int N = N_;
    auto rhs = [&](double r, const Vec<2>& y) -> Vec<2> {
      return {y[1], -G_(r, y[0], y[1]) - (N > 1 ? (N - 1) / r : 0.0) * y[1]};
    };
    double r0 = 0.0;
    Vec<2> y0{s, 0.0};
    if (N > 1) {
      r0 = 1e-9 * half_;
      const double g0 = G_(r0, s, 0.0);
      y0 = {s - g0 * r0 * r0 / (2.0 * N), -g0 * r0 / N};
    }
    LevelShot out;
    if (s <= level * (1.0 + 1e-9)) {
      out.F = -half_;
      out.r_hit = 0.0;
      if (rec && u) {
        u->assign(rec->size(), target);
        du->assign(rec->size(), 0.0);
      }
      return out;
    }
    std::size_t next = 0;
    if (rec && u) {
      u->assign(rec->size(), 0.0);
      du->assign(rec->size(), 0.0);
      while (next < rec->size() && (*rec)[next] <= r0) {
        (*u)[next] = y0[0];
        (*du)[next] = y0[1];
        ++next;
      }
    }
    auto obs = [&](const DenseStep<2>& st) {
      double x_stop = st.x1;
      bool hit = false;
      if (st.y1[0] <= level) {
        double a = st.x0, b = st.x1;
        for (int i = 0; i < 80 && b - a > 1e-16 * b; ++i) {
          const double m = 0.5 * (a + b);
          (st(m)[0] > level ? a : b) = m;
        }
        x_stop = b;
        out.r_hit = b;
        out.du_hit = st(b)[1];
        hit = true;
      }
      if (rec && u) {
        while (next < rec->size() && (*rec)[next] <= x_stop) {
          const Vec<2> v = st((*rec)[next]);
          (*u)[next] = v[0];
          (*du)[next] = v[1];
          ++next;
        }
      }
      return !hit;
    };
    OdeOptions oo;
    oo.rtol = tol_;
    oo.atol = tol_ * 1e-3 * std::max(1.0, std::fabs(s)) * std::min(1.0, level);
    oo.h_max = half_ / 32.0;
    const OdeOutcome<2> res = integrate_ode<2>(rhs, r0, y0, half_, oo, obs);
    if (out.r_hit < kInf) {
      const double slope = -out.du_hit;
      out.F = out.r_hit + (slope > 0.0 ? (level - target) / slope : 0.0) - half_;
    } else if (res.status == OdeStatus::StepUnderflow) {
      out.r_hit = res.x;
      out.du_hit = res.y[1];
      out.F = res.x - half_;
    } else {
      out.r_hit = half_;
      out.du_hit = res.y[1];
      out.F = res.y[1] < 0.0 ? (res.y[0] - target) / -res.y[1] : kInf;
    }
    if (rec && u) {
      for (; next < rec->size(); ++next) {
        const double x = (*rec)[next];
        (*u)[next] = std::max(level + out.du_hit * (x - out.r_hit), target);
        (*du)[next] = out.du_hit;
      }
    }
    return out;
  }

 private:
  const LefRhs& G_;
  int N_;
  double half_;
  double tol_;
};

struct LevelRoot {
  bool found = false;
  double s = 0.0;
  bool monotone = true;
  std::vector<std::pair<double, double>> probes;
};

LevelRoot find_centre(const Shooter& sh, double level, double target, double half,
                      const LefOptions& opt) {
  LevelRoot lr;
  const int P = std::max(opt.probes, 2);
  const double x0 = std::log(opt.s_min), x1 = std::log(opt.s_max);
  double xa = 0.0, xb = 0.0, Fa = 0.0, Fb = 0.0;
  double prev = -kInf;
  for (int j = 0; j < P; ++j) {
    const double x = x0 + (x1 - x0) * j / (P - 1);
    const double F = sh.shoot(std::exp(x), level, target).F;
    lr.probes.push_back({std::exp(x), F});
    if (F < prev - 1e-9 * half) lr.monotone = false;
    prev = F;
    if (!lr.found && j > 0 && lr.probes[j - 1].second < 0.0 && F >= 0.0) {
      lr.found = true;
      xa = std::log(lr.probes[j - 1].first);
      Fa = lr.probes[j - 1].second;
      xb = x;
      Fb = F;
    }
  }
  if (!lr.found) return lr;
  // Illinois false position in ln s with bisection fallback
  int side = 0;
  double x = xb;
  for (int it = 0; it < 300; ++it) {
    x = std::isfinite(Fb) ? (xa * Fb - xb * Fa) / (Fb - Fa) : 0.5 * (xa + xb);
    if (!(x > xa && x < xb) || it % 4 == 3) x = 0.5 * (xa + xb);
    const double F = sh.shoot(std::exp(x), level, target).F;
    if (std::fabs(F) <= 1e-14 * half) break;
    if (F < 0.0) {
      xa = x;
      Fa = F;
      if (side == -1) Fb *= 0.5;
      side = -1;
    } else {
      xb = x;
      Fb = F;
      if (side == 1) Fa *= 0.5;
      side = 1;
    }
    if (xb - xa <= 1e-15 * (1.0 + std::fabs(x))) break;
  }
  lr.s = std::exp(x);
  return lr;
}

}  // namespace

LefResult solve_dirichlet(const LefRhs& G, int N, double R, EigenMode n1_mode,
                          const LefOptions& opt) {
  if (N < 1) throw PreconditionError("solve_dirichlet: N must be >= 1");
  if (!(R > 0.0)) throw PreconditionError("solve_dirichlet: R must be positive");
  const bool interval = N == 1 && n1_mode == EigenMode::Interval;
  const double half = interval ? 0.5 * R : R;
  const Shooter sh(G, N, half, opt.tol);
  LefResult res;

  const LevelRoot root = find_centre(sh, opt.eps_b, 0.0, half, opt);
  res.probes = root.probes;
  res.monotone_map = root.monotone;
  res.sol.dimension = N;
  if (!root.monotone) res.sol.notes.push_back("shooting map not monotone in the centre value");
  if (!root.found) {
    res.sol.classification = Classification::NoSolution;
    res.sol.notes.push_back("no sign change of the shooting map on s in [" + io::fmt(opt.s_min) +
                            ", " + io::fmt(opt.s_max) + "]");
    return res;
  }
  res.solved = true;
  res.center = root.s;
  res.shoot_residual = std::fabs(sh.shoot(root.s, 0.5 * opt.eps_b, 0.0).F);
  res.flagged = res.shoot_residual >= 1e-6;
  if (res.flagged) res.sol.notes.push_back("halving the boundary cut moved the residual by >= 1e-6");

  // grid in the distance from the centre
  std::vector<double> rr;
  for (int i = 0; i < opt.grid_points; ++i) rr.push_back(half * i / (opt.grid_points - 1));
  for (double d : geometric_grid(1e-5 * half, 0.05 * half, 4)) rr.push_back(half - d);
  std::sort(rr.begin(), rr.end());
  rr.erase(std::unique(rr.begin(), rr.end()), rr.end());
  rr.back() = half;

  std::vector<double> u, du;
  sh.shoot(root.s, opt.eps_b, 0.0, &rr, &u, &du);
  u.back() = 0.0;

  auto to_solution = [&](const std::vector<double>& uu, const std::vector<double>& dd) {
    RadialSolution s;
    s.dimension = N;
    if (!interval) {
      s.r = rr;
      s.u = uu;
      s.du = dd;
      return s;
    }
    for (std::size_t i = rr.size(); i-- > 0;) {
      s.r.push_back(half - rr[i]);
      s.u.push_back(uu[i]);
      s.du.push_back(-dd[i]);
    }
    for (std::size_t i = 1; i < rr.size(); ++i) {
      s.r.push_back(half + rr[i]);
      s.u.push_back(uu[i]);
      s.du.push_back(dd[i]);
    }
    return s;
  };
  auto notes = std::move(res.sol.notes);
  res.sol = to_solution(u, du);
  res.sol.notes = std::move(notes);
  res.sol.classification = Classification::Bounded;
  res.sup_norm = *std::max_element(u.begin(), u.end());

  res.c1 = kInf;
  res.c2 = 0.0;
  for (std::size_t i = 0; i + 1 < rr.size(); ++i) {
    const double d = half - rr[i];
    res.c1 = std::min(res.c1, u[i] / d);
    res.c2 = std::max(res.c2, u[i] / d);
  }
  res.d_bounds = res.c1 > 0.0 && std::isfinite(res.c2);
  for (std::size_t i = 0; i + 1 < rr.size(); ++i) {
    const double d = half - rr[i];
    if (d < opt.d_band && (u[i] < res.c1 * d * (1 - 1e-12) || u[i] > res.c2 * d * (1 + 1e-12))) {
      res.d_bounds = false;
    }
  }

  std::vector<double> prev = u;
  for (int j = 1; j <= opt.regularize_levels; ++j) {
    const double k = std::ldexp(1.0, j);
    const LevelRoot rk = find_centre(sh, 1.0 / k, 1.0 / k, half, opt);
    if (!rk.found) {
      res.regularized_monotone = false;
      res.sol.notes.push_back("regularized problem k=" + io::fmt(k) + " not solved");
      break;
    }
    std::vector<double> uk, dk;
    sh.shoot(rk.s, 1.0 / k, 1.0 / k, &rr, &uk, &dk);
    uk.back() = 1.0 / k;
    for (std::size_t i = 0; i < rr.size(); ++i) {
      if (uk[i] < u[i] * (1 - 1e-9) - 1e-12) res.regularized_monotone = false;
      if (j > 1 && uk[i] > prev[i] * (1 + 1e-9) + 1e-12) res.regularized_monotone = false;
    }
    prev = uk;
    res.k_levels.push_back(k);
    res.regularized.push_back(to_solution(uk, dk));
  }
  return res;
}

LefResult solve_lef(const LEFProblem& p, const LefOptions& opt) {
  if (!(p.grad_p >= 0.0 && p.grad_p <= 2.0)) {
    throw PreconditionError("solve_lef: grad_p must lie in [0, 2]");
  }
  if (p.lambda < 0.0 || p.mu < 0.0) throw PreconditionError("solve_lef: lambda, mu must be >= 0");
  const LEFProblem& P = p;
  LefRhs G;
  switch (p.mode) {
    case LefMode::Linear:
      G = [&P](double r, double u, double) { return P.lambda * P.f.f(u) + P.a_pot.psi(r) * P.g(u); };
      break;
    case LefMode::Absorption:
      G = [&P](double r, double u, double) {
        return P.lambda * P.f.f(u) - P.K_pot.psi(r) * P.g(u) + P.mu * P.source.psi(r);
      };
      break;
    case LefMode::Convection:
      G = [&P](double, double u, double du) {
        return P.g(u) + P.lambda * std::pow(std::fabs(du), P.grad_p) + P.mu * P.f.f(u);
      };
      break;
  }
  return solve_dirichlet(G, p.N, p.R, p.n1_mode, opt);
}

BifurcationDiagram sweep(const LEFProblem& tmpl, const std::vector<double>& grid, int jobs,
                         const LefOptions& opt) {
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw PreconditionError("sweep: lambda grid must increase");
  }
  BifurcationDiagram d;
  d.points.resize(grid.size());
  if (grid.empty()) return d;
  d.lambda_star_theoretical = tmpl.lambda_star();
  parallel_for(grid.size(), jobs, [&](std::size_t i) {
    LEFProblem p = tmpl;
    p.lambda = grid[i];
    SweepPoint& pt = d.points[i];
    pt.lambda = grid[i];
    try {
      const LefResult r = solve_lef(p, opt);
      pt.status = r.solved ? SweepStatus::Solved : SweepStatus::NoSolution;
      pt.sup_norm = r.sup_norm;
      pt.center = r.center;
      if (!r.sol.notes.empty()) pt.message = r.sol.notes.front();
    } catch (const Error& e) {
      pt.status = SweepStatus::Failed;
      pt.message = e.what();
    }
  });
  double last = -kInf;
  for (std::size_t i = 0; i < d.points.size(); ++i) {
    const SweepPoint& pt = d.points[i];
    if (pt.status == SweepStatus::Solved) {
      if (!(pt.center > last)) d.monotone = false;
      last = pt.center;
    }
    if (pt.status == SweepStatus::NoSolution && !d.bracket) {
      if (i > 0 && d.points[i - 1].status == SweepStatus::Solved) {
        d.lambda_star_empirical = d.points[i - 1].lambda;
        d.bracket = std::make_pair(d.points[i - 1].lambda, pt.lambda);
      }
    }
  }
  return d;
}

std::string diagram_csv(const BifurcationDiagram& d) {
  io::Csv csv({"lambda", "status", "sup_norm", "center_value"});
  if (std::isfinite(d.lambda_star_theoretical)) {
    csv.comment("lambda_star_theoretical=" + io::fmt(d.lambda_star_theoretical));
  }
  for (const SweepPoint& p : d.points) {
    csv.row(std::vector<std::string>{io::fmt(p.lambda), to_string(p.status), io::fmt(p.sup_norm),
                                     io::fmt(p.center)});
  }
  return csv.str();
}

std::string eigen_csv(const EigenResult& e) {
  io::Csv csv({"r", "phi"});
  csv.comment("lambda1=" + io::fmt(e.lambda1));
  for (std::size_t i = 0; i < e.r.size(); ++i) csv.row({e.r[i], e.phi[i]});
  return csv.str();
}

// ------------------------------------------------------------------ Gelfand

bool gelfand_solvable(double lambda, double mu, double a_lim, double lambda1) {
  if (lambda < 0.0 || mu < 0.0 || a_lim < 0.0) {
    throw PreconditionError("gelfand_solvable: lambda, mu, a must be >= 0");
  }
  return lambda * (a_lim + mu) < lambda1;
}

RadialSolution gelfand_transform(const RadialSolution& sol, double lambda, GelfandDirection dir) {
  if (!(lambda > 0.0)) throw PreconditionError("gelfand_transform: lambda must be positive");
  RadialSolution out = sol;
  for (std::size_t i = 0; i < sol.u.size(); ++i) {
    const double w = sol.u[i];
    const double dw = i < sol.du.size() ? sol.du[i] : 0.0;
    if (dir == GelfandDirection::Forward) {
      const double e = std::exp(lambda * w);
      out.u[i] = std::expm1(lambda * w);
      if (i < out.du.size()) out.du[i] = lambda * e * dw;
    } else {
      if (!(w > -1.0)) {
        throw PreconditionError("gelfand_transform: back transform needs v > -1 (v=" + io::fmt(w) + ")");
      }
      out.u[i] = std::log1p(w) / lambda;
      if (i < out.du.size()) out.du[i] = dw / (lambda * (1.0 + w));
    }
  }
  return out;
}

expr::ScalarFn gelfand_rhs(const expr::ScalarFn& g, double lambda, double mu) {
  using namespace expr;
  const Expr v1 = add(variable(), constant(1.0));
  const Expr arg = div(make_unary(Op::Ln, v1), constant(lambda));
  const Expr body = add(mul(mul(constant(lambda), v1), substitute(g.body(), arg)),
                        mul(constant(lambda * mu), v1));
  return ScalarFn(body, -1.0, kInf);
}

LefResult solve_gelfand(const expr::ScalarFn& g, double lambda, double mu, int N, double R,
                        EigenMode n1_mode, const LefOptions& opt) {
  if (!(lambda > 0.0)) throw PreconditionError("solve_gelfand: lambda must be positive");
  if (mu < 0.0) throw PreconditionError("solve_gelfand: mu must be >= 0");
  const expr::ScalarFn Phi = gelfand_rhs(g, lambda, mu);
  LefResult r = solve_dirichlet([&](double, double v, double) { return Phi(v); }, N, R, n1_mode,
                                opt);
  if (!r.solved) return r;
  r.sol = gelfand_transform(r.sol, lambda, GelfandDirection::Back);
  r.center = std::log1p(r.center) / lambda;
  r.sup_norm = std::log1p(r.sup_norm) / lambda;
  return r;
}

YoungConstant young_constant(double a, double p, double lambda1) {
  if (!(p > 1.0 && p < 2.0)) throw PreconditionError("young_constant: need 1 < p < 2");
  if (!(lambda1 > 0.0)) throw PreconditionError("young_constant: lambda1 must be positive");
  if (a < 0.0) throw PreconditionError("young_constant: a must be >= 0");
  YoungConstant y;
  for (int j = 0; j < 1100; ++j) {
    const double C = std::ldexp(1.0, -j);
    const double lhs = a * std::pow(C, p / 2) + std::pow(C, p - 1);
    if (2.0 * lhs < lambda1) {
      y.C = C;
      y.cc_lhs = lhs;
      break;
    }
  }
  if (y.C == 0.0) throw NumericalError("young_constant: no admissible C = 2^-j");
  const double C = y.C;
  y.inq_max = -kInf;
  y.inq_derived_max = -kInf;
  for (double s : geometric_grid(1e-6, 1e6, 8)) {
    const double sp = std::pow(s, p);
    y.inq_max = std::max(y.inq_max, sp - std::pow(C, p / 2) * s * s - std::pow(C, p / 2 - 1));
    y.inq_derived_max =
        std::max(y.inq_derived_max, sp - std::pow(C, p / 2 - 1) * s * s - std::pow(C, p / 2));
  }
  y.inq_holds = y.inq_max <= 0.0;
  return y;
}

}  // namespace sellab
