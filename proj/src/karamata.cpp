#include "sellab/karamata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace sellab {

std::string describe(const Limit& l) {
  char buf[96];
  switch (l.kind) {
    case Limit::Kind::Finite:
      std::snprintf(buf, sizeof buf, "%.17g", l.value);
      return buf;
    case Limit::Kind::PlusInfinity: return "inf";
    case Limit::Kind::Unavailable: return "unavailable";
  }
  return "unavailable";
}

// ---------------------------------------------------------- antiderivative

namespace {

// Integrands such as exp(t)-1 carry cancellation noise near 0 that the
// tight tolerance cannot resolve; retry loosely before giving up.
QuadResult panel_integral(const RealFn& fn, double lo, double hi) {
  try {
    return gauss_kronrod(fn, lo, hi, 1e-300, 1e-14, 300);
  } catch (const NumericalError&) {
    return gauss_kronrod(fn, lo, hi, 1e-300, 1e-9, 4000);
  }
}

// int_0^u f with a relative tolerance: the integrand is rescaled to O(1)
// on [0,1] so the absolute tolerance of integrate_finite becomes relative.
double origin_integral(const expr::ScalarFn& f, double u) {
  double scale = std::fabs(f(0.5 * u));
  if (!(scale > 0.0) || !std::isfinite(scale)) scale = 1.0;
  RealFn g = [&](double x) { return f(u * x) / scale; };
  return u * scale * integrate_finite(g, 0.0, 1.0, 1e-14).value;
}

}  // namespace

Antiderivative::Antiderivative(expr::ScalarFn f) : f_(std::move(f)), k_min_(-40) {
  RealFn fn = [this](double s) { return f_(s); };
  double acc;
  try {
    acc = origin_integral(f_, std::ldexp(1.0, k_min_));
  } catch (const NumericalError&) {
    return;  // not integrable at the origin: F = +inf
  }
  knots_.push_back(acc);
  for (int k = k_min_; k < 1020; ++k) {
    const double lo = std::ldexp(1.0, k), hi = std::ldexp(1.0, k + 1);
    double fhi;
    try {
      fhi = f_(hi);
    } catch (const DomainError&) {
      break;
    }
    if (!std::isfinite(fhi)) break;
    QuadResult r;
    try {
      r = panel_integral(fn, lo, hi);
    } catch (const Error&) {
      break;
    }
    acc += r.value;
    if (!std::isfinite(acc)) break;
    knots_.push_back(acc);
  }
}

double Antiderivative::operator()(double u) const {
  if (u <= 0.0) {
    if (u == 0.0) return 0.0;
    throw PreconditionError("antiderivative evaluated at negative argument");
  }
  if (knots_.empty() || std::isinf(f_(u))) return kInf;
  RealFn fn = [this](double s) { return f_(s); };
  const double lo_knot = std::ldexp(1.0, k_min_);
  if (u < lo_knot) return origin_integral(f_, u);
  int k = std::ilogb(u);
  const int top = k_min_ + static_cast<int>(knots_.size()) - 1;
  const bool beyond = k > top;
  if (beyond) k = top;
  const double base = std::ldexp(1.0, k);
  const double F0 = knots_[static_cast<std::size_t>(k - k_min_)];
  if (u == base) return F0;
  if (!beyond) return F0 + panel_integral(fn, base, u).value;
  // the table stopped where the cumulative integral overflowed
  try {
    return F0 + panel_integral(fn, base, u).value;
  } catch (const NumericalError&) {
    return kInf;
  }
}

// ---------------------------------------------------------------- rv index

RvIndex rv_index(const RealFn& fn, double u_max) {
  std::vector<double> idx;
  for (double frac : {0.125, 0.25, 0.5}) {
    const double u = u_max * frac;
    const double fu = fn(u);
    for (double xi : {2.0, 4.0, 8.0}) {
      const double fx = fn(xi * u);
      if (!(fu > 0.0) || !(fx > 0.0) || !std::isfinite(fu) || !std::isfinite(fx)) {
        return {std::numeric_limits<double>::quiet_NaN(), kInf, false};
      }
      idx.push_back(std::log(fx / fu) / std::log(xi));
    }
  }
  double mean = 0.0;
  for (double v : idx) mean += v;
  mean /= static_cast<double>(idx.size());
  const auto [mn, mx] = std::minmax_element(idx.begin(), idx.end());
  const double spread = *mx - *mn;
  return {mean, spread, spread <= 0.05};
}

// ------------------------------------------------------------ nonlinearity

namespace {

// Limit of q(u) as u -> inf from samples at U/2^k, U the largest
// evaluable abscissa not above u_max. Corrections assumed O(1/u).
Limit limit_at_infinity(const std::function<double(double)>& q, double u_max) {
  double U = u_max;
  auto ok = [&](double u) {
    try {
      return std::isfinite(q(u));
    } catch (const Error&) {
      return false;
    }
  };
  int cuts = 0;
  while (!ok(U) && cuts < 2000) {
    U *= 0.5;
    ++cuts;
  }
  if (cuts >= 2000) return Limit::unavailable(std::nan(""));
  std::vector<double> v;
  for (int k = 3; k >= 0; --k) v.push_back(q(std::ldexp(U, -k)));
  // faster than any power: q itself grows like u
  if (v[3] > 0.0 && v[2] > 0.0 && v[3] / v[2] > 1.5 && v[2] / v[1] > 1.5) return Limit::infinite();
  LimitEstimate L = richardson(std::span<const double>(v).subspan(1), 0.5, 1.0);
  if (L.err <= 1e-3 && std::fabs(L.value - v[3]) <= 1e-3 * std::max(1.0, std::fabs(v[3]))) {
    return Limit::of(L.value, std::max(L.err, 1e-15));
  }
  if (L.err <= 1e-3) return Limit::of(L.value, L.err);
  return Limit::unavailable(v[3]);
}

}  // namespace

std::optional<Singularity> origin_singularity(const expr::ScalarFn& g) {
  double g1, g2;
  try {
    g1 = g(1e-8);
    g2 = g(1e-10);
  } catch (const DomainError&) {
    return std::nullopt;
  }
  if (!(g1 > 0.0) || !(g2 > 0.0)) return std::nullopt;
  const double alpha = std::log(g2 / g1) / std::log(100.0);
  if (!(alpha > 1e-6)) return std::nullopt;
  double C0 = 0.0;
  for (double s : geometric_grid(1e-12, 1.0, 4)) C0 = std::max(C0, g(s) * std::pow(s, alpha));
  return Singularity{alpha, C0, 1.0};
}

Nonlinearity analyze_nonlinearity(const expr::ScalarFn& f, double u_max, bool require_monotone) {
  Nonlinearity nl;
  nl.f = f;
  nl.fprime = f.derivative();

  // positivity and monotonicity on a sampled grid
  double prev = -kInf;
  for (double s : geometric_grid(1e-6, u_max, 8)) {
    double v;
    try {
      v = f(s);
    } catch (const DomainError& e) {
      throw PreconditionError(std::string("f not evaluable on (0, u_max): ") + e.what());
    }
    if (std::isinf(v)) break;
    if (v == 0.0 && !require_monotone && prev > 0.0) break;  // decayed below range
    if (!(v > 0.0)) {
      throw PreconditionError("f not positive at s=" + std::to_string(s));
    }
    if (require_monotone && v < prev * (1.0 - 1e-12)) {
      throw PreconditionError("f not nondecreasing near s=" + std::to_string(s));
    }
    prev = v;
  }
  nl.F = Antiderivative(f);
  nl.singular = origin_singularity(f);

  // m = lim f(s)/s
  {
    const double s6 = u_max * 1e-2, s7 = u_max * 1e-1, s8 = u_max;
    const double r6 = f(s6) / s6, r7 = f(s7) / s7, r8 = f(s8) / s8;
    const double d1 = r7 - r6, d2 = r8 - r7;
    if (!std::isfinite(r8)) {
      nl.m = Limit::infinite();
    } else if (std::fabs(d2) <= 1e-3 * std::max(1.0, std::fabs(r8))) {
      nl.m = Limit::of(std::max(0.0, aitken(r6, r7, r8)), std::fabs(d2));
    } else if (d2 > 0.0 && d2 >= 0.5 * d1) {
      nl.m = Limit::infinite();
    } else {
      nl.m = Limit::unavailable(r8);
    }
  }
  // Lambda = sup_{s>=1} f(s)/s on 200 log points
  {
    double sup = 0.0;
    int arg = 0;
    bool overflow = false;
    for (int i = 0; i < 200; ++i) {
      const double s = std::pow(u_max, i / 199.0);
      const double r = f(s) / s;
      if (!std::isfinite(r)) {
        overflow = true;
        break;
      }
      if (r >= sup) {
        sup = r;
        arg = i;
      }
    }
    const int top_decade = static_cast<int>(199.0 * (1.0 - 1.0 / std::log10(u_max)));
    if (overflow || (arg >= top_decade && nl.m.kind == Limit::Kind::PlusInfinity)) {
      nl.Lambda = Limit::infinite();
    } else if (arg >= top_decade && nl.m.kind != Limit::Kind::Finite) {
      nl.Lambda = Limit::infinite();
    } else {
      nl.Lambda = Limit::of(sup, 0.0);
    }
  }
  // theta = lim u f'/f and gamma = lim (F/f)'
  const expr::ScalarFn& fp = nl.fprime;
  nl.theta = limit_at_infinity([&](double u) { return u * fp(u) / f(u); }, u_max);
  nl.gamma = limit_at_infinity(
      [&](double u) {
        const double fu = f(u);
        return 1.0 - (nl.F(u) / fu) * (fp(u) / fu);
      },
      u_max);
  // rho: index of regular variation of f'
  if (nl.theta.kind == Limit::Kind::PlusInfinity) {
    nl.rho = Limit::infinite();
  } else {
    RvIndex ri{std::nan(""), kInf, false};
    try {
      ri = rv_index([&](double u) { return fp(u); }, u_max);
    } catch (const DomainError&) {
    }
    nl.rho = ri.regular ? Limit::of(ri.value, ri.spread) : Limit::unavailable(ri.value);
    if (!ri.regular) nl.notes.push_back("f' not regularly varying at this scale");
  }
  if (nl.rho.finite() && nl.gamma.finite() && nl.theta.finite()) {
    char buf[160];
    const double e1 = std::fabs(nl.gamma.value - 1.0 / (nl.rho.value + 2.0));
    const double e2 = std::fabs(nl.gamma.value - 1.0 / (nl.theta.value + 1.0));
    if (e1 > 1e-3 || e2 > 1e-3) {
      std::snprintf(buf, sizeof buf,
                    "identity check failed: |gamma-1/(rho+2)|=%.3g |gamma-1/(theta+1)|=%.3g", e1,
                    e2);
      nl.notes.push_back(buf);
    }
  }
  if (nl.m.kind == Limit::Kind::Unavailable) nl.notes.push_back("m not stabilized");
  if (nl.theta.kind == Limit::Kind::Unavailable) nl.notes.push_back("theta not stabilized");
  if (nl.gamma.kind == Limit::Kind::Unavailable) nl.notes.push_back("gamma not stabilized");
  return nl;
}

Nonlinearity analyze_nonlinearity(const std::string& f_src, double u_max,
                                  bool require_monotone) {
  return analyze_nonlinearity(expr::ScalarFn::parse(f_src, 0.0), u_max, require_monotone);
}

ConvergenceVerdict keller_osserman(const Nonlinearity& f, double tol) {
  return classify_tail_integral([&](double t) { return 1.0 / std::sqrt(f.F(t)); }, 1.0, tol);
}

ConvergenceVerdict necessary_condition_entire(const Nonlinearity& f, double tol) {
  return classify_tail_integral([&](double t) { return 1.0 / f.f(t); }, 1.0, tol);
}

// ---------------------------------------------------------------- ell limits

namespace {

// Limit of a sequence sampled at t_j = 10^-j (ascending j).
LimitEstimate extrapolate_to_zero(const std::vector<double>& t, const std::vector<double>& v) {
  const std::size_t n = v.size();
  if (n == 0) throw NumericalError("ell_limits: no evaluable samples");
  if (n < 3) return {v.back(), n == 2 ? std::fabs(v[1] - v[0]) : kInf};
  const double d1 = v[n - 2] - v[n - 3], d2 = v[n - 1] - v[n - 2];
  const double scale = std::max(1.0, std::fabs(v.back()));
  if (std::fabs(d2) <= 1e-13 * scale) return {v.back(), std::fabs(d2) + 1e-15};
  if (std::fabs(d2) < 0.3 * std::fabs(d1)) {
    // corrections in powers of t
    std::vector<double> last(v.end() - 3, v.end());
    LimitEstimate L = richardson(last, t[n - 1] / t[n - 2], 1.0);
    return {L.value, std::max(L.err, std::fabs(d2) * 1e-2)};
  }
  // corrections in powers of 1/ln(1/t): polynomial extrapolation in x
  auto neville = [&](std::size_t m) {
    std::vector<double> x(m), p(m);
    for (std::size_t i = 0; i < m; ++i) {
      x[i] = 1.0 / std::log(1.0 / t[n - m + i]);
      p[i] = v[n - m + i];
    }
    for (std::size_t lvl = 1; lvl < m; ++lvl) {
      for (std::size_t i = 0; i + lvl < m; ++i) {
        p[i] = (x[i + lvl] * p[i] - x[i] * p[i + 1]) / (x[i + lvl] - x[i]);
      }
    }
    return p[0];
  };
  const std::size_t m = std::min<std::size_t>(n, 4);
  const double hi = neville(m), lo = neville(m - 1);
  return {hi, std::fabs(hi - lo)};
}

}  // namespace

std::optional<KRatio> k_ratio(const expr::ScalarFn& lnk, double t) {
  double Lt, Lp;
  try {
    Lt = lnk(t);
    Lp = lnk.derivative()(t);
  } catch (const DomainError&) {
    return std::nullopt;
  }
  if (!std::isfinite(Lt) || !std::isfinite(Lp)) return std::nullopt;
  if (Lp < 0.0) throw PreconditionError("k not increasing at t=" + std::to_string(t));
  if (Lp == 0.0) {
    // locally constant ln k: integrate exp(ln k(s) - ln k(t)) over s directly
    RealFn g = [&](double x) { return std::exp(lnk(t * x) - Lt); };
    try {
      const double I = integrate_finite(g, 0.0, 1.0, 1e-13).value;
      return KRatio{t * I, 1.0, Lt};
    } catch (const Error&) {
      return std::nullopt;
    }
  }
  const double w = 1.0 / Lp;
  const double X = t * Lp;
  // Beyond this k varies on scales double precision cannot resolve around
  // t, and ln k(s) - ln k(t) loses all digits.
  const double eps = std::numeric_limits<double>::epsilon();
  if (X > 1e6 || eps * std::fabs(Lt) > 1e-7) return std::nullopt;
  const double tol = std::max(1e-13, 64.0 * eps * std::fabs(Lt));
  RealFn g = [&](double x) {
    const double s = t - w * x;
    if (s <= 0.0) return 0.0;
    return std::exp(lnk(s) - Lt);
  };
  // I = int_0^X exp(ln k(t - w x) - ln k(t)) dx over doubling panels
  double I = 0.0;
  double lo = 0.0, hi = std::min(1.0, X);
  while (lo < X) {
    double p;
    try {
      p = integrate_finite(g, lo, hi, tol).value;
    } catch (const Error&) {
      return std::nullopt;
    }
    I += p;
    if (hi >= X || (hi >= 8.0 && std::fabs(p) <= 1e-17 * std::fabs(I))) break;
    lo = hi;
    hi = std::min(2.0 * hi, X);
  }
  if (!std::isfinite(I)) return std::nullopt;
  return KRatio{w * I, 1.0 - I, Lt};
}

EllLimits ell_limits(const expr::ScalarFn& k, double nu) {
  const expr::ScalarFn lnk(expr::log_expand(k.body()));
  EllLimits out{};
  // decades 10^-j; quarter decades when fewer than three decades resolve
  for (int per : {1, 4}) {
    out.t.clear();
    out.ratio.clear();
    out.slope.clear();
    for (int j = per; j <= 8 * per; ++j) {
      const double t = std::pow(10.0, -static_cast<double>(j) / per);
      if (t >= nu) continue;
      const std::optional<KRatio> r = k_ratio(lnk, t);
      if (!r) continue;
      out.t.push_back(t);
      out.ratio.push_back(r->ratio);
      out.slope.push_back(r->slope);
    }
    if (out.t.size() >= 3) break;
  }
  if (out.t.empty()) throw NumericalError("ell_limits: k not evaluable on any sample point");
  const LimitEstimate e0 = extrapolate_to_zero(out.t, out.ratio);
  const LimitEstimate e1 = extrapolate_to_zero(out.t, out.slope);
  out.ell0 = e0.value;
  out.ell0_err = e0.err;
  out.ell1 = e1.value;
  out.ell1_err = e1.err;
  return out;
}

std::string to_string(KKind k) {
  switch (k) {
    case KKind::User: return "user";
    case KKind::ExpA: return "expA";
    case KKind::InvS: return "invS";
    case KKind::InvLnS: return "invLnS";
    case KKind::Power: return "power";
  }
  return "user";
}

namespace {

void check_k_increasing(const expr::ScalarFn& k, double nu) {
  const expr::ScalarFn lnk(expr::log_expand(k.body()));
  for (double t : geometric_grid(std::min(1e-8, 0.5 * nu), 0.999 * nu, 4)) {
    double v;
    try {
      v = lnk.derivative()(t);
    } catch (const DomainError& e) {
      throw PreconditionError(std::string("k not evaluable: ") + e.what());
    }
    if (std::isnan(v) || v < 0.0) {
      throw PreconditionError("k not increasing at t=" + std::to_string(t));
    }
  }
}

}  // namespace

KFunction make_k(KKind kind, const std::string& S_src, double D) {
  if (!(D > 0.0)) throw PreconditionError("make_k: D must be positive");
  const expr::ScalarFn S = expr::ScalarFn::parse(S_src);
  const RvIndex q = rv_index([&](double u) { return S.derivative()(u); }, 1e8);
  if (!q.regular) throw PreconditionError("make_k: S' is not regularly varying");
  if (q.value <= -1.0) throw PreconditionError("make_k: index of S' must exceed -1");
  using namespace expr;
  const Expr S1 = substitute(S.body(), div(constant(1.0), variable()));
  Expr body;
  double predicted;
  switch (kind) {
    case KKind::ExpA:
      body = make_unary(Op::Exp, neg(S1));
      predicted = 0.0;
      break;
    case KKind::InvS:
      body = div(constant(1.0), S1);
      predicted = 1.0 / (q.value + 2.0);
      break;
    case KKind::InvLnS:
      body = div(constant(1.0), make_unary(Op::Ln, S1));
      predicted = 1.0;
      break;
    default: throw PreconditionError("make_k: kind must be expA, invS or invLnS");
  }
  KFunction kf;
  kf.k = ScalarFn(body, 0.0, 1.0 / D);
  kf.nu = 1.0 / D;
  kf.kind = kind;
  check_k_increasing(kf.k, kf.nu);
  const EllLimits el = ell_limits(kf.k, kf.nu);
  kf.ell0 = el.ell0;
  kf.ell1 = el.ell1;
  kf.ell1_err = el.ell1_err;
  kf.ell1_predicted = predicted;
  if (std::fabs(el.ell1 - predicted) > std::max(2e-2, 3.0 * el.ell1_err)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "make_k: measured l1=%.6g (+-%.2g) disagrees with predicted %.6g",
                  el.ell1, el.ell1_err, predicted);
    throw NumericalError(buf);
  }
  return kf;
}

KFunction power_k(double alpha, double nu) {
  if (!(alpha >= 0.0)) throw PreconditionError("power_k: alpha must be >= 0");
  using namespace expr;
  KFunction kf;
  kf.k = ScalarFn(pow(variable(), constant(alpha)), 0.0, nu);
  kf.nu = nu;
  kf.kind = KKind::Power;
  kf.alpha = alpha;
  kf.ell1_predicted = 1.0 / (alpha + 1.0);
  const EllLimits el = ell_limits(kf.k, nu);
  kf.ell0 = el.ell0;
  kf.ell1 = el.ell1;
  kf.ell1_err = el.ell1_err;
  return kf;
}

KFunction user_k(const std::string& k_src, double nu) {
  KFunction kf;
  kf.k = expr::ScalarFn::parse(k_src, 0.0, nu);
  kf.nu = nu;
  check_k_increasing(kf.k, nu);
  const EllLimits el = ell_limits(kf.k, nu);
  kf.ell0 = el.ell0;
  kf.ell1 = el.ell1;
  kf.ell1_err = el.ell1_err;
  return kf;
}

// ------------------------------------------------------------- rate constants

double xi0_power(double rho, double ell1, double c) {
  if (!(rho > 0.0)) throw PreconditionError("xi0_power: rho must be positive");
  if (!(c > 0.0)) throw PreconditionError("xi0_power: c must be positive");
  if (!(ell1 >= 0.0 && ell1 <= 1.0)) throw PreconditionError("xi0_power: l1 must lie in [0,1]");
  return std::pow((2.0 + ell1 * rho) / (c * (2.0 + rho)), 1.0 / rho);
}

double growth_ratio(const expr::ScalarFn& f, double xi) {
  auto A = [&](double u) { return f(xi * u) / (xi * f(u)); };
  const double a7 = A(1e7), a8 = A(1e8);
  if (!std::isfinite(a8) || !(a8 > 0.0)) {
    throw NumericalError("A(xi) not finite at xi=" + std::to_string(xi));
  }
  if (std::fabs(a8 - a7) > 1e-3 * a8) {
    throw NumericalError("A(xi) not stabilized at xi=" + std::to_string(xi));
  }
  return a8;
}

double xi0_via_A(const Nonlinearity& f, double gamma, double Kprime0, double c) {
  if (gamma == 0.0) throw PreconditionError("xi0_via_A: gamma must be nonzero");
  if (!(c > 0.0)) throw PreconditionError("xi0_via_A: c must be positive");
  const double target = (Kprime0 * (1.0 - 2.0 * gamma) + 2.0 * gamma) / c;
  double prev = -kInf;
  double a_lo = 0.0, a_hi = 0.0;
  for (int i = 0; i <= 60; ++i) {
    const double xi = std::pow(10.0, -6.0 + 12.0 * i / 60.0);
    const double a = growth_ratio(f.f, xi);
    if (!(a > prev)) throw NumericalError("xi0_via_A: A not increasing on the sampled grid");
    prev = a;
    if (i == 0) a_lo = a;
    a_hi = a;
  }
  if (target < a_lo || target > a_hi) {
    throw NumericalError("xi0_via_A: target " + std::to_string(target) + " outside range of A");
  }
  const double x = find_root_monotone([&](double lx) { return growth_ratio(f.f, std::exp(lx)); },
                                      target, std::log(1e-6), std::log(1e6), 1e-15 * target);
  return std::exp(x);
}

double heaviside(double x) {
  if (x > 0.0) return 1.0;
  if (x < 0.0) return 0.0;
  return 0.5;
}

TwoTerm chi_two_term(const TwoTermSpec& s) {
  if (!(s.rho > 0.0) || !(s.zeta > 0.0) || !(s.theta > 0.0)) {
    throw PreconditionError("chi_two_term: rho, zeta, theta must be positive");
  }
  TwoTerm out{};
  out.varpi = std::min(s.theta, s.zeta);
  out.tau1 = out.varpi / s.zeta;
  out.tie_warning = std::fabs(s.theta - s.zeta) < 1e-9;
  const double h1 = out.tie_warning ? 0.5 : heaviside(s.theta - s.zeta);
  const double h2 = out.tie_warning ? 0.5 : heaviside(s.zeta - s.theta);
  const double chi1 =
      -(1.0 + s.zeta) * s.ell_lower / (2.0 * s.zeta) * h1 - s.c_tilde / s.rho * h2;
  out.chi = chi1;
  if (s.kind == TwoTermCase::EtaZeroTau) {
    if (!std::isfinite(s.ell_upper)) throw PreconditionError("chi_two_term: l^star must be finite");
    const double base = -s.rho * s.ell_lower / 2.0;
    if (base < 0.0 && out.tau1 != std::floor(out.tau1)) {
      throw PreconditionError("chi_two_term: -rho*l_star/2 negative with non-integer tau1");
    }
    const double xi0 = std::pow(2.0 / (2.0 + s.rho), 1.0 / s.rho);
    out.chi = chi1 - s.ell_upper / s.rho * std::pow(base, out.tau1) *
                         (1.0 / (s.rho + 2.0) + std::log(xi0));
  }
  return out;
}

}  // namespace sellab
