#include "sellab/radial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sellab/bifurcation.hpp"
#include "sellab/io.hpp"
#include "sellab/parallel.hpp"

namespace sellab {

// ---------------------------------------------------------------- potentials

RadialPotential RadialPotential::radial(const std::string& src) {
  return radial(expr::ScalarFn::parse(src, 0.0));
}

RadialPotential RadialPotential::envelopes(const std::string& phi_src,
                                           const std::string& psi_src) {
  RadialPotential p{expr::ScalarFn::parse(phi_src, 0.0), expr::ScalarFn::parse(psi_src, 0.0)};
  for (double r : geometric_grid(1e-6, 1e6, 2)) {
    if (p.psi(r) < 0.0 || p.phi(r) < p.psi(r)) {
      throw PreconditionError("potential envelopes need phi >= psi >= 0 (fails at r=" +
                              io::fmt(r) + ")");
    }
  }
  return p;
}

bool RadialPotential::is_radial() const {
  return expr::structurally_equal(phi.body(), psi.body());
}

namespace {

bool vanishes(const expr::ScalarFn& fn) {
  if (expr::is_constant(fn.body(), 0.0)) return true;
  for (double r : geometric_grid(1e-6, 1e6, 2)) {
    if (fn(r) != 0.0) return false;
  }
  return true;
}

// int_0^inf fn over (0,1] plus the classified tail.
ConvergenceVerdict half_line_integral(const RealFn& fn, double tol, const TailOptions& opt = {}) {
  const ConvergenceVerdict tail = classify_tail_integral(fn, 1.0, tol, opt);
  if (const auto* c = std::get_if<Convergent>(&tail)) {
    const QuadResult head = integrate_finite(fn, 0.0, 1.0, 1e-12);
    return Convergent{head.value + c->value, head.err + c->err};
  }
  return tail;
}

}  // namespace

PsiWeight::PsiWeight(expr::ScalarFn psi, double Lambda_N)
    : psi_(std::move(psi)), Lambda_N_(Lambda_N) {
  RealFn g = [this](double s) { return s * psi_(s); };
  double acc = integrate_finite(g, 0.0, std::ldexp(1.0, k_min_), 1e-14).value;
  knots_.push_back(acc);
  for (int k = k_min_; k < 64; ++k) {
    acc += gauss_kronrod(g, std::ldexp(1.0, k), std::ldexp(1.0, k + 1), 1e-300, 1e-13).value;
    knots_.push_back(acc);
  }
}

double PsiWeight::log(double r) const {
  if (r <= 0.0) return 0.0;
  RealFn g = [this](double s) { return s * psi_(s); };
  const double lo = std::ldexp(1.0, k_min_);
  double I;
  if (r < lo) {
    I = integrate_finite(g, 0.0, r, 1e-14).value;
  } else {
    const int top = k_min_ + static_cast<int>(knots_.size()) - 1;
    const int k = std::min(std::ilogb(r), top);
    const double base = std::ldexp(1.0, k);
    I = knots_[static_cast<std::size_t>(k - k_min_)];
    if (r > base) I += gauss_kronrod(g, base, r, 1e-300, 1e-13).value;
  }
  return Lambda_N_ * I;
}

double PsiWeight::operator()(double r) const { return std::exp(log(r)); }

RealFn slow_variation_integrand(const RadialPotential& pot, double Lambda_N) {
  auto Psi = std::make_shared<PsiWeight>(pot.psi, Lambda_N);
  return [pot, Psi](double r) { return r * pot.gap(r) * (*Psi)(r); };
}

namespace {

// int_0^inf fn for an integrand built on gap = phi - psi. The difference
// carries relative noise eps phi/gap, so panels stop where it exceeds
// 2.2e-7 and the tail is closed by the fitted slope.
ConvergenceVerdict gap_integral(const RadialPotential& pot, const RealFn& fn, double tol) {
  double r_max = std::ldexp(1.0, 60);
  for (double r = 1.0; r < r_max; r *= 2.0) {
    const double p = std::fabs(pot.phi(r));
    if (p > 0.0 && std::fabs(pot.gap(r)) < 2.2e-7 * p) {
      r_max = r;
      break;
    }
  }
  double sum = integrate_finite(fn, 0.0, 1.0, 1e-10).value, err = 0.0;
  std::vector<double> x, y;
  for (double lo = 1.0; 2.0 * lo <= r_max; lo *= 2.0) {
    const QuadResult q = gauss_kronrod(fn, lo, 2.0 * lo, 1e-300, 1e-7);
    sum += q.value;
    err += q.err;
    x.push_back(2.0 * lo);
    y.push_back(fn(2.0 * lo));
  }
  if (x.size() < 9) return Inconclusive{"gap unresolved beyond r=" + io::fmt(r_max)};
  for (double v : y) {
    if (!(v > 0.0)) return Inconclusive{"integrand changes sign"};
  }
  const std::size_t k = std::min<std::size_t>(8, x.size());
  const double slope = loglog_slope(std::span<const double>(x).last(k),
                                    std::span<const double>(y).last(k));
  if (slope > -0.95) return Divergent{slope};
  if (slope >= -1.05) return Inconclusive{"borderline slope", slope};
  const double prev = loglog_slope(std::span<const double>(x).last(k + 1).first(k),
                                   std::span<const double>(y).last(k + 1).first(k));
  const double tail = x.back() * y.back() / (-slope - 1.0);
  err += std::fabs(tail - x.back() * y.back() / (-prev - 1.0));
  const double value = sum + tail;
  if (err > tol * (1.0 + value)) {
    return Inconclusive{"slope " + io::fmt(slope) + " but tail not resolved", slope};
  }
  return Convergent{value, err};
}

}  // namespace

ConvergenceVerdict check_slow_variation(const RadialPotential& pot, double Lambda_N, double tol) {
  if (pot.is_radial()) return Convergent{0.0, 0.0};
  return gap_integral(pot, slow_variation_integrand(pot, Lambda_N), tol);
}

double large_condition_integrand(const expr::ScalarFn& psi, int N, double t) {
  if (!(t > 0.0)) return 0.0;
  // x = t - s: int_0^t e^-x (1 - x/t)^(N-1) psi(t - x) dx
  RealFn g = [&](double x) { return std::exp(-x) * std::pow(1.0 - x / t, N - 1) * psi(t - x); };
  const double cut = std::min(t, 50.0);
  double v = integrate_finite(g, 0.0, cut, 1e-13).value;
  if (t > cut) v += integrate_finite(g, cut, std::min(t, 800.0), 1e-13).value;
  return v;
}

LargeCondition check_large_condition(const expr::ScalarFn& psi, int N, double tol) {
  if (N < 1) throw PreconditionError("check_large_condition: N must be >= 1");
  if (vanishes(psi)) return {Convergent{0.0, 0.0}, Convergent{0.0, 0.0}};
  LargeCondition out;
  out.outer = classify_tail_integral(
      [&](double t) { return large_condition_integrand(psi, N, t); }, 1.0, tol);
  if (N >= 3) {
    ConvergenceVerdict m = half_line_integral([&](double t) { return t * psi(t); }, tol);
    if (auto* c = std::get_if<Convergent>(&m)) {
      c->value /= (N - 2);
      c->err /= (N - 2);
    }
    out.bound = m;
  } else {
    out.bound = Inconclusive{"bound needs N >= 3"};
  }
  return out;
}

// ------------------------------------------------------------ linear passes

namespace {

// Cubic Hermite interpolant of (y, y') on ascending nodes.
struct Hermite {
  const std::vector<double>* r;
  const std::vector<double>* y;
  const std::vector<double>* dy;

  double operator()(double x) const {
    const auto& R = *r;
    if (x <= R.front()) return y->front();
    if (x >= R.back()) return y->back();
    const std::size_t i =
        static_cast<std::size_t>(std::upper_bound(R.begin(), R.end(), x) - R.begin()) - 1;
    const double h = R[i + 1] - R[i];
    const double s = (x - R[i]) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return h00 * (*y)[i] + h10 * h * (*dy)[i] + h01 * (*y)[i + 1] + h11 * h * (*dy)[i + 1];
  }
};

// w'' + ((N-1)/r + c) w' = q(r), w(0) = w0, w'(0) = 0, recorded on nodes
// (nodes[0] = 0).
void linear_pass(const RealFn& q, double w0, int N, double c, const std::vector<double>& nodes,
                 std::vector<double>& w, std::vector<double>& dw) {
  const std::size_t n = nodes.size();
  const double R = nodes.back();
  w.assign(n, w0);
  dw.assign(n, 0.0);
  double r0 = 0.0;
  Vec<2> y0{w0, 0.0};
  if (N > 1) {
    r0 = std::min(1e-10 * R, 1e-3 * nodes[1]);
    const double q0 = q(r0);
    y0 = {w0 + q0 * r0 * r0 / (2.0 * N), q0 * r0 / N};
  }
  auto rhs = [&](double r, const Vec<2>& y) -> Vec<2> {
    const double damp = (N > 1 ? (N - 1) / r : 0.0) + c;
    return {y[1], q(r) - damp * y[1]};
  };
  std::size_t next = 1;
  auto observer = [&](const DenseStep<2>& st) {
    while (next < n && nodes[next] <= st.x1) {
      const Vec<2> v = nodes[next] == st.x1 ? st.y1 : st(nodes[next]);
      w[next] = v[0];
      dw[next] = v[1];
      ++next;
    }
    return true;
  };
  OdeOptions oo;
  oo.rtol = 1e-12;
  oo.atol = 1e-14 * std::max(1.0, std::fabs(w0));
  oo.h_max = R / 64.0;
  const OdeOutcome<2> out = integrate_ode<2>(rhs, r0, y0, R, oo, observer);
  if (out.status == OdeStatus::StepUnderflow) {
    throw NumericalError("radial linear pass: step-size underflow at r=" + io::fmt(out.x));
  }
}

std::vector<double> graded_nodes(double R, int panels) {
  std::vector<double> r(static_cast<std::size_t>(panels) + 1);
  for (int i = 0; i <= panels; ++i) r[i] = R * std::pow(static_cast<double>(i) / panels, 1.5);
  r.back() = R;
  return r;
}

double sup_rel_change(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0, s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d = std::max(d, std::fabs(a[i] - b[i]));
    s = std::max(s, std::fabs(b[i]));
  }
  return s > 0.0 ? d / s : d;
}

Classification classify_growth(double ratio, const ConvergenceVerdict& cond) {
  if (ratio > 1.05 && is_divergent(cond)) return Classification::EntireLarge;
  if (ratio <= 1.05 && is_convergent(cond)) return Classification::Bounded;
  return Classification::Undetermined;
}

struct PicardCore {
  std::vector<double> r, w, dw;
  std::vector<double> sup_change;
  int iterations = 0;
};

PicardCore picard_core(const expr::ScalarFn& psi, const Nonlinearity& f, double b0, double R,
                       int N, double tol, int panels, int max_it, double M, bool check_growth,
                       bool& monotone, bool& growth_ok) {
  PicardCore c;
  c.r = graded_nodes(R, panels);
  c.w.assign(c.r.size(), b0);
  c.dw.assign(c.r.size(), 0.0);
  std::vector<double> wn, dwn;
  for (int k = 1; k <= max_it; ++k) {
    const Hermite W{&c.r, &c.w, &c.dw};
    linear_pass([&](double s) { return psi(s) * f.f(W(s)); }, b0, N, 1.0, c.r, wn, dwn);
    for (std::size_t i = 0; i < c.r.size(); ++i) {
      if (wn[i] < c.w[i] - 1e-9 * std::fabs(c.w[i])) {
        monotone = false;
        throw NumericalError("picard_gradient_entire: iterate " + std::to_string(k + 1) +
                             " decreases at r=" + io::fmt(c.r[i]));
      }
      if (check_growth && wn[i] > b0 * std::exp(M * c.r[i]) * (1.0 + 1e-9)) {
        growth_ok = false;
        throw NumericalError("picard_gradient_entire: growth bound violated at r=" +
                             io::fmt(c.r[i]));
      }
    }
    const double ch = sup_rel_change(wn, c.w);
    c.sup_change.push_back(ch);
    std::swap(c.w, wn);
    std::swap(c.dw, dwn);
    c.iterations = k;
    if (ch < tol) return c;
  }
  throw NumericalError("picard_gradient_entire: no convergence in " + std::to_string(max_it) +
                       " iterations");
}

}  // namespace

PicardResult picard_gradient_entire(const expr::ScalarFn& psi, const Nonlinearity& f, double b0,
                                    double R, int N, double tol, const PicardOptions& opt) {
  if (!(b0 > 0.0)) throw PreconditionError("picard_gradient_entire: b0 must be positive");
  if (!(R > 0.0)) throw PreconditionError("picard_gradient_entire: R must be positive");
  if (N < 1) throw PreconditionError("picard_gradient_entire: N must be >= 1");
  PicardResult res;
  const double Lambda = std::isnan(opt.Lambda) ? (f.Lambda.finite() ? f.Lambda.value : kInf)
                                               : opt.Lambda;
  const bool bound_applies = N >= 3 && std::isfinite(Lambda) && b0 >= 1.0;
  const double Lambda_N = N >= 3 ? Lambda / (N - 2) : kInf;
  double tpsi = 0.0;
  for (int i = 0; i <= 4096; ++i) {
    const double t = R * i / 4096.0;
    tpsi = std::max(tpsi, t * psi(t));
  }
  res.M = bound_applies ? Lambda_N * tpsi : kInf;
  if (b0 < 1.0) res.w.notes.push_back("b0 < 1: the ordering argument assumes b0 > 1");
  if (!bound_applies) res.w.notes.push_back("growth bound not checked (needs N >= 3, finite Lambda)");

  int panels = opt.panels;
  PicardCore core = picard_core(psi, f, b0, R, N, tol, panels, opt.max_iterations, res.M,
                                bound_applies, res.monotone, res.growth_bound);
  for (int ref = 0; ref < opt.max_refinements; ++ref) {
    PicardCore fine = picard_core(psi, f, b0, R, N, tol, 2 * panels, opt.max_iterations, res.M,
                                  bound_applies, res.monotone, res.growth_bound);
    const double moved = std::fabs(fine.w.back() - core.w.back()) / std::fabs(fine.w.back());
    core = std::move(fine);
    panels *= 2;
    if (moved < tol) break;
  }
  res.sup_change = core.sup_change;
  res.w.dimension = N;
  res.w.r = core.r;
  res.w.u = core.w;
  res.w.du = core.dw;
  res.w.iterations = core.iterations;

  const Hermite W{&res.w.r, &res.w.u, &res.w.du};
  res.growth_ratio = W(R) / W(0.5 * R);
  res.large_condition = check_large_condition(psi, N, 1e-6).outer;
  res.w.classification = classify_growth(res.growth_ratio, res.large_condition);

  if (opt.phi && N >= 3 && std::isfinite(Lambda)) {
    const RadialPotential pot{*opt.phi, psi};
    const ConvergenceVerdict gap_moment =
        pot.is_radial() ? ConvergenceVerdict{Convergent{0.0, 0.0}}
                        : gap_integral(pot, [&](double t) { return t * pot.gap(t); }, 1e-5);
    const ConvergenceVerdict sv = check_slow_variation(pot, Lambda_N, 1e-5);
    if (is_convergent(gap_moment) && is_convergent(sv)) {
      const double K = std::exp(Lambda_N * std::get<Convergent>(gap_moment).value);
      res.b_star = 1.0 + K * Lambda_N * std::get<Convergent>(sv).value;
      if (b0 <= *res.b_star) res.w.notes.push_back("b0 does not exceed the ordering constant");
    } else {
      res.w.notes.push_back("ordering constant unavailable: gap integrals not convergent");
    }
    bool m = true, g = true;
    PicardCore v = picard_core(*opt.phi, f, 1.0, R, N, tol, panels, opt.max_iterations, kInf,
                               false, m, g);
    RadialSolution vs;
    vs.dimension = N;
    vs.r = v.r;
    vs.u = v.w;
    vs.du = v.dw;
    vs.iterations = v.iterations;
    bool ordered = true;
    for (std::size_t i = 0; i < v.r.size(); ++i) {
      if (v.w[i] > W(v.r[i]) * (1.0 + 1e-9)) ordered = false;
    }
    res.ordered = ordered;
    res.v = std::move(vs);
  }
  return res;
}

// ------------------------------------------------------------------ systems

std::vector<double> radial_double_integral(const expr::ScalarFn& p, int N,
                                           const std::vector<double>& r) {
  std::vector<double> nodes = r;
  if (nodes.empty() || nodes.front() != 0.0) nodes.insert(nodes.begin(), 0.0);
  std::vector<double> w, dw;
  linear_pass([&](double s) { return p(s); }, 0.0, N, 0.0, nodes, w, dw);
  if (r.empty() || r.front() != 0.0) w.erase(w.begin());
  return w;
}

double lipschitz_constant(double Cp, double Cq, double m_lip) {
  return (1.0 + m_lip * Cq) * std::exp(m_lip * m_lip * Cp * Cq);
}

double potential_constant(const expr::ScalarFn& p, int N, double tol) {
  if (N < 3) throw PreconditionError("potential_constant: N must be >= 3");
  if (vanishes(p)) return 0.0;
  const ConvergenceVerdict v = half_line_integral([&](double t) { return t * p(t); }, tol);
  if (!is_convergent(v)) {
    throw NumericalError("potential_constant: int t p(t) dt not convergent: " + describe(v));
  }
  return std::get<Convergent>(v).value / (N - 2);
}

double lipschitz_on_range(const expr::ScalarFn& fn, double lo, double hi) {
  const expr::ScalarFn& d = fn.derivative();
  double m = 0.0;
  for (int i = 0; i <= 2000; ++i) m = std::max(m, std::fabs(d(lo + (hi - lo) * i / 2000.0)));
  return m;
}

SystemResult solve_system(const SystemProblem& sys, double R, int N, double tol,
                          const SystemOptions& opt) {
  if (!(sys.a > 0.0) || !(sys.b > 0.0)) {
    throw PreconditionError("solve_system: central values must be positive");
  }
  if (N < 3) throw PreconditionError("solve_system: N must be >= 3");
  SystemResult res;
  RadialSolution& sol = res.sol;
  sol.dimension = N;

  for (double c : {1.0, 10.0}) {
    const double r6 = sys.g.f(c * sys.f.f(1e6)) / 1e6;
    const double r8 = sys.g.f(c * sys.f.f(1e8)) / 1e8;
    if (!(r8 < 1e-2) || !(r8 <= r6)) res.h3_holds = false;
  }
  if (!res.h3_holds) sol.notes.push_back("warning: g(c f(t))/t does not tend to 0 numerically");

  const std::vector<double> r = graded_nodes(R, opt.panels);
  const std::size_t n = r.size();
  std::vector<double> u(n, sys.a), du(n, 0.0), v(n, sys.b), dv(n, 0.0);
  std::vector<double> un, dun, vn, dvn;
  const bool p_zero = vanishes(sys.p.psi), q_zero = vanishes(sys.q.psi);
  int k = 0;
  for (; k < opt.max_iterations; ++k) {
    const Hermite V{&r, &v, &dv};
    if (p_zero) {
      un.assign(n, sys.a);
      dun.assign(n, 0.0);
    } else {
      linear_pass([&](double s) { return sys.p.psi(s) * sys.g.f(V(s)); }, sys.a, N, 0.0, r, un,
                  dun);
    }
    const Hermite U{&r, &un, &dun};
    if (q_zero) {
      vn.assign(n, sys.b);
      dvn.assign(n, 0.0);
    } else {
      linear_pass([&](double s) { return sys.q.psi(s) * sys.f.f(U(s)); }, sys.b, N, 0.0, r, vn,
                  dvn);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (un[i] < u[i] - 1e-9 * u[i] || vn[i] < v[i] - 1e-9 * v[i]) {
        res.monotone = false;
        throw NumericalError("solve_system: iterate decreases at r=" + io::fmt(r[i]));
      }
    }
    const double ch = std::max(sup_rel_change(un, u), sup_rel_change(vn, v));
    std::swap(u, un);
    std::swap(du, dun);
    std::swap(v, vn);
    std::swap(dv, dvn);
    if (ch < tol) break;
  }
  if (k == opt.max_iterations) throw NumericalError("solve_system: no convergence");
  sol.iterations = k + 1;
  sol.r = r;
  sol.u = u;
  sol.du = du;
  sol.v = v;
  sol.dv = dv;

  const std::vector<double> A = radial_double_integral(sys.p.psi, N, r);
  const std::vector<double> B = radial_double_integral(sys.q.psi, N, r);
  const double gb = sys.g.f(sys.b), fa = sys.f.f(sys.a);
  for (std::size_t i = 0; i < n; ++i) {
    if (u[i] < (sys.a + gb * A[i]) * (1.0 - 1e-9) || v[i] < (sys.b + fa * B[i]) * (1.0 - 1e-9)) {
      res.lower_bound = false;
    }
  }

  auto moment = [&](const expr::ScalarFn& p) -> ConvergenceVerdict {
    if (vanishes(p)) return Convergent{0.0, 0.0};
    return half_line_integral([&](double t) { return t * p(t); }, 1e-8);
  };
  res.p_condition = moment(sys.p.psi);
  res.q_condition = moment(sys.q.psi);
  if (is_divergent(res.p_condition) && is_divergent(res.q_condition)) {
    res.predicted = Classification::EntireLarge;
  } else if (is_convergent(res.p_condition) && is_convergent(res.q_condition)) {
    res.predicted = Classification::Bounded;
  } else {
    sol.notes.push_back("mixed integral conditions: outside both cases of the dichotomy");
  }
  const Hermite U{&r, &u, &du};
  res.growth_ratio = U(R) / U(0.5 * R);
  res.observed = res.growth_ratio > 1.05 ? Classification::EntireLarge : Classification::Bounded;
  sol.classification =
      res.predicted == res.observed ? res.predicted : Classification::Undetermined;
  return res;
}

// ------------------------------------------------------------ blow-up

double boundary_distance(const LogisticProblem& P, double r) {
  switch (P.domain) {
    case DomainKind::Ball: return P.R - r;
    case DomainKind::Exterior: return r - P.R0;
    case DomainKind::Annulus: return std::min(r - P.R0, P.R - r);
    case DomainKind::WholeSpace: return kInf;
  }
  return kInf;
}

namespace {

struct Shot {
  int side = 0;  // -1 fell to zero, +1 exceeded the cap, 0 reached the end
  double end_u = 0.0;
  std::vector<double> u, du;  // at the record radii, in integration order
};

Shot shoot(const LogisticProblem& P, double r_start, double r_end, double u0, double du0,
           const std::vector<double>& rec, double cap, double tol) {
  Shot s;
  const int N = P.N;
  auto G = [&](double r, double u) {
    const double fu = u > 0.0 ? P.f.f(u) : 0.0;
    return P.b(r) * fu - P.a_lin * u;
  };
  double x0 = r_start;
  Vec<2> y0{u0, du0};
  if (N > 1 && r_start == 0.0) {
    x0 = 1e-10 * std::fabs(r_end - r_start);
    const double g0 = G(x0, u0);
    y0 = {u0 + g0 * x0 * x0 / (2.0 * N), g0 * x0 / N};
  }
  auto rhs = [&](double r, const Vec<2>& y) -> Vec<2> {
    const double damp = N > 1 ? (N - 1) / r : 0.0;
    return {y[1], G(r, y[0]) - damp * y[1]};
  };
  const double dir = r_end > r_start ? 1.0 : -1.0;
  std::size_t next = 0;
  auto observer = [&](const DenseStep<2>& st) {
    while (next < rec.size() && dir * (rec[next] - st.x1) <= 0.0) {
      const Vec<2> v = rec[next] == st.x1 ? st.y1 : st(rec[next]);
      s.u.push_back(v[0]);
      s.du.push_back(v[1]);
      ++next;
    }
    if (st.y1[0] <= 0.0) {
      s.side = -1;
      return false;
    }
    if (st.y1[0] > cap) {
      s.side = 1;
      return false;
    }
    return true;
  };
  if (!rec.empty() && rec.front() == r_start) {
    s.u.push_back(u0);
    s.du.push_back(du0);
    next = 1;
  }
  OdeOptions oo;
  oo.rtol = tol;
  oo.atol = tol * 1e-2 * std::max(1.0, std::fabs(u0));
  oo.h_max = std::fabs(r_end - r_start) / 32.0;
  const OdeOutcome<2> out = integrate_ode<2>(rhs, x0, y0, r_end, oo, observer);
  if (out.status == OdeStatus::StepUnderflow) {
    // steps collapse only where u runs away
    s.side = out.y[0] > 0.0 ? 1 : -1;
  }
  s.end_u = out.y[0];
  return s;
}

struct LevelSetup {
  double r_start, r_end;
  std::function<std::pair<double, double>(double)> start;  // param -> (u, u')
  double p0;  // initial parameter guess
};

// Bisection on a parameter that increases the end value monotonically.
Shot solve_level(const LogisticProblem& P, const LevelSetup& L, double target,
                 const std::vector<double>& rec, double tol) {
  const double cap = 1e6 * target;
  auto run = [&](double p) {
    const auto [u0, du0] = L.start(p);
    return shoot(P, L.r_start, L.r_end, u0, du0, rec, cap, tol);
  };
  auto value = [&](const Shot& s) -> double {
    if (s.side == 1) return kInf;
    if (s.side == -1) return -kInf;
    return std::log(s.end_u / target);
  };
  double lo = L.p0, hi = L.p0;
  Shot s = run(L.p0);
  double v = value(s);
  if (v == 0.0) return s;
  double step = std::max(1.0, std::fabs(L.p0));
  for (int i = 0; i < 200; ++i) {
    if (v < 0.0) {
      lo = hi;
      hi = lo + step;
    } else {
      hi = lo;
      lo = hi - step;
    }
    step *= 2.0;
    s = run(v < 0.0 ? hi : lo);
    const double vn = value(s);
    if ((vn < 0.0) != (v < 0.0)) break;
    v = vn;
    if (i == 199) throw NumericalError("boundary_blowup: shooting bracket not found");
  }
  // lo under, hi over
  Shot best = s;
  double best_v = kInf;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    Shot m = run(mid);
    const double vm = value(m);
    if (std::isfinite(vm) && std::fabs(vm) < best_v) {
      best_v = std::fabs(vm);
      best = m;
    }
    if (std::fabs(vm) <= 1e-12) break;
    (vm < 0.0 ? lo : hi) = mid;
  }
  if (!(best_v < 1e-6)) {
    throw NumericalError("boundary_blowup: shooting failed at n=" + io::fmt(target));
  }
  return best;
}

std::vector<double> blowup_radii(const LogisticProblem& P, const BlowupOptions& opt) {
  const double Lh = 0.5 * (P.R - P.R0);
  const double dmin = opt.d_min_fraction * (P.R - P.R0);
  const std::vector<double> d = geometric_grid(dmin, Lh, opt.points_per_octave);
  std::vector<double> r;
  const bool near_outer = P.domain == DomainKind::Ball || P.domain == DomainKind::Annulus;
  const bool near_inner = P.domain == DomainKind::Exterior || P.domain == DomainKind::Annulus;
  for (double x : d) {
    if (near_outer) r.push_back(P.R - x);
    if (near_inner) r.push_back(P.R0 + x);
  }
  // uniform points over the half away from the blow-up boundary
  if (P.domain != DomainKind::Annulus) {
    const double a = near_outer ? P.R0 : P.R0 + Lh;
    const double b = near_outer ? P.R0 + Lh : P.R;
    for (int i = 0; i <= 32; ++i) r.push_back(a + (b - a) * i / 32.0);
  }
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end(),
                      [](double x, double y) { return std::fabs(x - y) <= 1e-14 * (1 + std::fabs(x)); }),
          r.end());
  return r;
}

}  // namespace

std::vector<RadialSolution> boundary_blowup_levels(const LogisticProblem& P, double tol,
                                                   const BlowupOptions& opt_in,
                                                   std::vector<double>* radii_out) {
  if (P.domain == DomainKind::WholeSpace) {
    throw PreconditionError("boundary_blowup: needs a bounded domain");
  }
  if (!(P.R > P.R0) || P.R0 < 0.0) throw PreconditionError("boundary_blowup: need 0 <= R0 < R");
  if (P.domain != DomainKind::Ball && P.N > 1 && !(P.R0 > 0.0)) {
    throw PreconditionError("boundary_blowup: annulus and exterior domains need R0 > 0 for N > 1");
  }
  const ConvergenceVerdict ko = keller_osserman(P.f, 1e-4);
  if (!is_convergent(ko)) {
    throw PreconditionError(
        "boundary_blowup: large solutions exist only under a convergent Keller-Osserman "
        "integral: " + describe(ko));
  }
  if (P.omega0_radius && *P.omega0_radius > 0.0) {
    const double lam = lambda_inf_1(P.N, *P.omega0_radius);
    if (!(P.a_lin < lam)) {
      throw PreconditionError("boundary_blowup: need a < lambda_inf_1 = " + io::fmt(lam));
    }
  }
  BlowupOptions opt = opt_in;
  if (opt.n_levels.empty()) {
    for (int j = 0; j <= 8; ++j) opt.n_levels.push_back(10.0 * std::ldexp(1.0, j));
  }
  const std::vector<double> radii = blowup_radii(P, opt);
  if (radii_out) *radii_out = radii;

  std::vector<RadialSolution> levels(opt.n_levels.size());
  parallel_for(opt.n_levels.size(), opt.jobs, [&](std::size_t j) {
    const double n = opt.n_levels[j];
    LevelSetup L;
    std::vector<double> rec = radii;
    switch (P.domain) {
      case DomainKind::Ball:
        L.r_start = 0.0;
        L.r_end = P.R;
        L.start = [](double s) { return std::make_pair(s, 0.0); };
        L.p0 = 0.5 * n;
        break;
      case DomainKind::Exterior:
        L.r_start = P.R;
        L.r_end = P.R0;
        L.start = [&P](double tau) { return std::make_pair(P.outer_value, -tau); };
        L.p0 = 0.0;
        std::reverse(rec.begin(), rec.end());
        break;
      case DomainKind::Annulus:
        L.r_start = P.R0;
        L.r_end = P.R;
        L.start = [n](double sigma) { return std::make_pair(n, sigma); };
        L.p0 = 0.0;
        break;
      case DomainKind::WholeSpace: break;
    }
    if (P.domain == DomainKind::Ball) {
      // u(0) = s in (0, n]: bisect directly on that bracket first
      L.p0 = 0.5 * n;
    }
    Shot s = solve_level(P, L, n, rec, tol);
    if (s.u.size() != rec.size()) {
      throw NumericalError("boundary_blowup: level n=" + io::fmt(n) + " did not reach all radii");
    }
    if (P.domain == DomainKind::Exterior) {
      std::reverse(s.u.begin(), s.u.end());
      std::reverse(s.du.begin(), s.du.end());
    }
    RadialSolution& sol = levels[j];
    sol.dimension = P.N;
    sol.r = radii;
    sol.u = std::move(s.u);
    sol.du = std::move(s.du);
    sol.classification = Classification::Undetermined;
  });
  return levels;
}

RadialSolution boundary_blowup(const LogisticProblem& P, double tol, const BlowupOptions& opt) {
  std::vector<double> radii;
  const std::vector<RadialSolution> levels = boundary_blowup_levels(P, tol, opt, &radii);
  const std::size_t L = levels.size();
  const std::size_t n = radii.size();
  for (std::size_t j = 1; j < L; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const double a = levels[j - 1].u[i], b = levels[j].u[i];
      if (b < a - 1e-8 * std::fabs(a)) {
        throw NumericalError("boundary_blowup: level solutions not monotone in n at r=" +
                             io::fmt(radii[i]));
      }
    }
  }
  RadialSolution out = levels.back();
  out.notes.push_back("levels=" + std::to_string(L));
  if (L < 4) {
    out.classification = Classification::Undetermined;
    out.u_err.assign(n, kInf);
    if (L >= 2) {
      for (std::size_t i = 0; i < n; ++i) out.u_err[i] = std::fabs(levels[L - 1].u[i] - levels[L - 2].u[i]);
    }
    out.notes.push_back("fewer than 4 levels: no extrapolation");
    return out;
  }
  out.u_err.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double a1 = aitken(levels[L - 3].u[i], levels[L - 2].u[i], levels[L - 1].u[i]);
    const double a0 = aitken(levels[L - 4].u[i], levels[L - 3].u[i], levels[L - 2].u[i]);
    const double d1 = aitken(levels[L - 3].du[i], levels[L - 2].du[i], levels[L - 1].du[i]);
    const double s0 = levels[L - 3].u[i] - levels[L - 4].u[i];
    const double s1 = levels[L - 2].u[i] - levels[L - 3].u[i];
    const double s2 = levels[L - 1].u[i] - levels[L - 2].u[i];
    const double q1 = s1 / s0, q2 = s2 / s1;
    if (s2 == 0.0 || (s0 > 0.0 && s1 > 0.0 && s2 > 0.0 && q2 < 1.0 && std::fabs(q2 - q1) <= 0.5 * q1)) {
      out.u[i] = a1;
      out.du[i] = d1;
      out.u_err[i] = std::fabs(a1 - a0);
    } else {
      // not yet contracting: keep the finest level and flag it
      out.u_err[i] = kInf;
    }
  }
  out.classification = Classification::BoundaryBlowup;
  return out;
}

// ---------------------------------------------------------------- residual

double residual(const std::string& u_src, const RadialRhs& rhs, int N,
                const std::vector<double>& r_grid) {
  const expr::ScalarFn u = expr::ScalarFn::parse(u_src);
  const expr::ScalarFn& du = u.derivative();
  const expr::ScalarFn& d2u = du.derivative();
  double sup = 0.0;
  for (double r : r_grid) {
    const double lap = (r == 0.0 && N > 1) ? N * d2u(r) : d2u(r) + (N > 1 ? (N - 1) / r : 0.0) * du(r);
    sup = std::max(sup, std::fabs(lap - rhs(r, u(r), du(r))));
  }
  return sup;
}

// ---------------------------------------------------------- rate measurement

RateTable measure_boundary_rate(const LogisticProblem& P, const RadialSolution& sol,
                                const BlowupProfile& profile) {
  if (profile.variant != P.b_normalization) {
    throw PreconditionError("measure_boundary_rate: profile variant " + to_string(profile.variant) +
                            " does not match the problem normalization " +
                            to_string(P.b_normalization));
  }
  if (sol.classification != Classification::BoundaryBlowup) {
    throw PreconditionError("measure_boundary_rate: solution is not classified BoundaryBlowup");
  }
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < sol.r.size(); ++i) {
    const double d = boundary_distance(P, sol.r[i]);
    if (!(d > 0.0) || d < profile.t.front() || d > profile.t.back()) continue;
    if (!sol.u_err.empty() && !(sol.u_err[i] <= 1e-4 * std::fabs(sol.u[i]))) continue;
    idx.push_back(i);
  }
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return boundary_distance(P, sol.r[a]) < boundary_distance(P, sol.r[b]);
  });
  if (idx.size() > 10) idx.resize(10);
  if (idx.size() < 3) throw NumericalError("measure_boundary_rate: fewer than 3 resolved points");
  RateTable t;
  for (std::size_t i : idx) {
    const double d = boundary_distance(P, sol.r[i]);
    const double h = profile(d);
    t.rows.push_back({d, sol.u[i] / h, sol.u[i] / (profile.xi0 * h)});
  }
  const std::vector<double> v{t.rows[2].u_over_xi0h, t.rows[1].u_over_xi0h, t.rows[0].u_over_xi0h};
  const LimitEstimate L = richardson(v, t.rows[0].d / t.rows[1].d, 1.0);
  t.limit = L.value;
  t.drift = std::fabs(L.value - t.rows[0].u_over_xi0h);
  return t;
}

std::string solution_csv(const RadialSolution& sol) {
  const bool sys = !sol.v.empty();
  io::Csv csv(sys ? std::vector<std::string>{"r", "u", "v", "u_prime", "v_prime"}
                  : std::vector<std::string>{"r", "u", "u_prime"});
  csv.comment("classification=" + to_string(sol.classification));
  for (std::size_t i = 0; i < sol.r.size(); ++i) {
    if (sys) {
      csv.row({sol.r[i], sol.u[i], sol.v[i], sol.du[i], sol.dv[i]});
    } else {
      csv.row({sol.r[i], sol.u[i], sol.du[i]});
    }
  }
  return csv.str();
}

}  // namespace sellab
