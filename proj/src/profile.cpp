#include "sellab/profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sellab/io.hpp"

namespace sellab {

std::string to_string(ProfileVariant v) {
  return v == ProfileVariant::KIntegrand ? "kIntegrand" : "sqrtKIntegrand";
}

ProfileVariant parse_profile_variant(const std::string& s) {
  if (s == "kIntegrand" || s == "k") return ProfileVariant::KIntegrand;
  if (s == "sqrtKIntegrand" || s == "sqrtk") return ProfileVariant::SqrtKIntegrand;
  throw PreconditionError("unknown profile variant '" + s + "'");
}

// ------------------------------------------------------------ tail map

double BlowupProfile::Phi(double y) const {
  if (!(y > 0.0)) throw PreconditionError("Phi: argument must be positive");
  const double Fy = f.F(y);
  if (std::isinf(Fy)) return 0.0;
  if (!(Fy > 0.0)) throw NumericalError("Phi: F vanishes at y=" + io::fmt(y));
  // s = y/(1-w) maps (y, inf) onto (0, 1); integrating in v = 1-w keeps the
  // singular end at v = 0 exactly representable. The integrand is scaled
  // by (2F(y))^{-1/2} so that it equals 1 at s = y.
  RealFn g = [&](double v) {
    const double s = y / v;
    if (std::isinf(s)) return 0.0;
    const double Fs = f.F(s);
    if (std::isinf(Fs)) return 0.0;
    return std::sqrt(Fy / Fs) / (v * v);
  };
  const double I = integrate_finite(g, 0.0, 1.0, 1e-13).value;
  return y / std::sqrt(2.0 * Fy) * I;
}

double BlowupProfile::log_kappa_integral(double s) const {
  if (const std::optional<KRatio> r = k_ratio(ln_kappa, s)) return r->lnk + std::log(r->ratio);
  const double L = ln_kappa(s);
  RealFn g = [&](double x) { return std::exp(ln_kappa(s * x) - L); };
  return std::log(s) + L + std::log(integrate_finite(g, 0.0, 1.0, 1e-13).value);
}

double BlowupProfile::kappa(double s) const { return std::exp(ln_kappa(s)); }

double BlowupProfile::kappa_prime(double s) const {
  return kappa(s) * ln_kappa.derivative()(s);
}

double BlowupProfile::solve(double s) const {
  const double target = log_kappa_integral(s);
  auto G = [&](double x) { return std::log(Phi(std::exp(x))) - target; };
  // d ln Phi / d ln y = -y (2F(y))^{-1/2} / Phi(y)
  auto dG = [&](double x, double phi) {
    const double y = std::exp(x);
    return -y / (std::sqrt(2.0 * f.F(y)) * phi);
  };
  // bracket in x = ln y; G decreases in x
  double a = 0.0, ga = G(a);
  double b = a, gb = ga;
  const double step = ga > 0.0 ? 1.0 : -1.0;
  for (int i = 0; i < 1400; ++i) {
    b = a + step;
    if (b > 709.0 || b < -745.0) break;
    gb = G(b);
    if (!std::isfinite(gb) && step > 0.0) gb = -kInf;
    if ((gb > 0.0) != (ga > 0.0)) break;
    a = b;
    ga = gb;
  }
  if ((gb > 0.0) == (ga > 0.0)) {
    throw NumericalError("build_profile: root bracket exhausted at t=" + io::fmt(s));
  }
  if (a > b) {
    std::swap(a, b);
    std::swap(ga, gb);
  }
  // safeguarded Newton on [a, b] with ga > 0 > gb
  double x = 0.5 * (a + b);
  for (int it = 0; it < 200; ++it) {
    const double phi = Phi(std::exp(x));
    const double gx = std::log(phi) - target;
    if (std::fabs(gx) <= 1e-14 * std::max(1.0, std::fabs(target))) break;
    (gx > 0.0 ? a : b) = x;
    double xn = x - gx / dG(x, phi);
    if (!(xn > a && xn < b)) xn = 0.5 * (a + b);
    if (std::fabs(xn - x) <= 1e-15 * std::max(1.0, std::fabs(x))) {
      x = xn;
      break;
    }
    x = xn;
  }
  return std::exp(x);
}

void BlowupProfile::finalize() {
  std::vector<double> lt(t.size()), lh(h.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    lt[i] = std::log(t[i]);
    lh[i] = std::log(h[i]);
  }
  if (t.size() >= 2) interp = MonotoneCubic(lt, lh);
}

double BlowupProfile::operator()(double s) const {
  if (t.empty() || !(s >= t.front() && s <= t.back())) {
    throw PreconditionError("profile evaluated at t=" + io::fmt(s) +
                            " outside its table; extrapolation refused");
  }
  const auto it = std::lower_bound(t.begin(), t.end(), s);
  if (it != t.end() && *it == s) return h[static_cast<std::size_t>(it - t.begin())];
  return std::exp(interp(std::log(s)));
}

std::vector<double> profile_grid(double nu, int levels) {
  std::vector<double> g;
  for (int j = levels; j >= 1; --j) g.push_back(std::ldexp(nu, -j));
  return g;
}

BlowupProfile build_profile(const Nonlinearity& f, const KFunction& k, ProfileVariant variant,
                            std::vector<double> t_grid, const ProfileOptions& opt) {
  const ConvergenceVerdict ko = keller_osserman(f, opt.ko_tol);
  if (!is_convergent(ko)) {
    throw PreconditionError("build_profile: Keller-Osserman integral not convergent: " +
                            describe(ko));
  }
  if (!(opt.c > 0.0)) throw PreconditionError("build_profile: c must be positive");
  if (t_grid.empty()) t_grid = profile_grid(k.nu, 30);
  std::sort(t_grid.begin(), t_grid.end());
  t_grid.erase(std::unique(t_grid.begin(), t_grid.end()), t_grid.end());
  if (!(t_grid.front() > 0.0) || !(t_grid.back() < k.nu)) {
    throw PreconditionError("build_profile: t_grid must lie in (0, nu)");
  }

  BlowupProfile p;
  p.variant = variant;
  p.f = f;
  p.k = k;
  p.c = opt.c;
  const expr::Expr lnk = expr::log_expand(k.k.body());
  if (variant == ProfileVariant::KIntegrand) {
    p.ln_kappa = expr::ScalarFn(lnk);
    p.kappa_ell1 = k.ell1;
  } else {
    p.ln_kappa = expr::ScalarFn(expr::mul(expr::constant(0.5), lnk));
    const expr::ScalarFn sk(expr::make_unary(expr::Op::Sqrt, k.k.body()), 0.0, k.nu);
    p.kappa_ell1 = ell_limits(sk, k.nu).ell1;
  }

  if (opt.xi0) {
    p.xi0 = *opt.xi0;
  } else if (variant == ProfileVariant::KIntegrand) {
    if (f.rho.kind == Limit::Kind::PlusInfinity) {
      p.xi0 = 1.0;
    } else if (f.rho.finite()) {
      p.xi0 = xi0_power(f.rho.value, std::clamp(p.kappa_ell1, 0.0, 1.0), opt.c);
    } else {
      throw PreconditionError("build_profile: index rho unavailable; supply xi0");
    }
  } else {
    if (!f.gamma.finite()) throw PreconditionError("build_profile: gamma unavailable; supply xi0");
    p.xi0 = xi0_via_A(f, f.gamma.value, p.kappa_ell1, opt.c);
  }

  for (double s : t_grid) {
    const double hs = p.solve(s);
    const double rt = std::fabs(std::expm1(std::log(p.Phi(hs)) - p.log_kappa_integral(s)));
    p.max_roundtrip_err = std::max(p.max_roundtrip_err, rt);
    const double root2F = std::sqrt(2.0 * f.F(hs));
    const double ks = p.kappa(s);
    p.t.push_back(s);
    p.h.push_back(hs);
    p.hp.push_back(-ks * root2F);
    p.hpp.push_back(-p.kappa_prime(s) * root2F + ks * ks * f.f(hs));
  }
  if (p.max_roundtrip_err > 1e-8) {
    throw NumericalError("build_profile: round-trip error " + io::fmt(p.max_roundtrip_err) +
                         " exceeds 1e-8");
  }
  p.finalize();
  return p;
}

double predicted_rate(const BlowupProfile& p, double d, RateOrder order) {
  const double one = p.xi0 * p(d);
  if (order == RateOrder::One) return one;
  if (!p.chi || !p.varpi) throw PreconditionError("predicted_rate: two-term data not set");
  return one * (1.0 + *p.chi * std::pow(d, *p.varpi));
}

ProfileChecks check_profile(const BlowupProfile& p) {
  ProfileChecks c;
  const double rho = p.f.rho.value;
  const double l1 = p.kappa_ell1;
  c.h2_predicted = p.f.rho.kind == Limit::Kind::PlusInfinity ? l1 : (2.0 + rho * l1) / (2.0 + rho);
  c.decreasing = true;
  for (std::size_t i = 0; i < p.t.size(); ++i) {
    const double ks = p.kappa(p.t[i]);
    c.t.push_back(p.t[i]);
    c.h2_ratio.push_back(p.hpp[i] / (ks * ks * p.f.f(p.h[i])));
    c.h_over_hpp.push_back(p.h[i] / p.hpp[i]);
    c.hp_over_hpp.push_back(p.hp[i] / p.hpp[i]);
    if (i > 0 && !(p.h[i] < p.h[i - 1])) c.decreasing = false;
  }
  return c;
}

std::string profile_csv(const BlowupProfile& p) {
  io::Csv csv({"t", "h", "h_prime"});
  csv.comment("variant=" + to_string(p.variant) + " xi0=" + io::fmt(p.xi0));
  for (std::size_t i = 0; i < p.t.size(); ++i) csv.row({p.t[i], p.h[i], p.hp[i]});
  return csv.str();
}

// ------------------------------------------------------------ ODE profile

OdeProfile profile_ode_g(const Nonlinearity& g, double t_max, double t_min,
                         int points_per_octave) {
  if (!(t_max > 0.0)) throw PreconditionError("profile_ode_g: t_max must be positive");
  if (t_min <= 0.0) t_min = 1e-6 * t_max;
  const ConvergenceVerdict v = classify_origin_integral([&](double s) { return g.f(s); }, 1.0,
                                                        1e-6);
  if (!is_convergent(v)) {
    throw PreconditionError(
        "profile_ode_g: g is not integrable at the origin, so h'(0) is not finite: " +
        describe(v));
  }
  OdeProfile out;
  const double t0 = 1e-3 * t_min;
  out.alpha = g.singular ? g.singular->alpha : 0.0;
  out.beta = 2.0 / (1.0 + out.alpha);
  // C from g ~ C0 s^-alpha near the start value
  double C = 1.0;
  for (int it = 0; it < 50; ++it) {
    const double s = C * std::pow(t0, out.beta);
    out.C0 = g.f(s) * std::pow(s, out.alpha);
    const double Cn = std::pow(out.C0 / (out.beta * (out.beta - 1.0)), 1.0 / (1.0 + out.alpha));
    if (std::fabs(Cn - C) <= 1e-15 * C) break;
    C = Cn;
  }
  out.C = C;
  const double h0 = C * std::pow(t0, out.beta);

  const std::vector<double> grid = geometric_grid(t_min, t_max, points_per_octave);
  auto rhs = [&](double, const Vec<1>& y) -> Vec<1> {
    if (!(y[0] > 0.0)) throw DomainError("profile rhs", y[0]);
    return {std::sqrt(2.0 * g.F(y[0]))};
  };
  std::size_t next = 0;
  auto record = [&](double t, double h) {
    out.t.push_back(t);
    out.h.push_back(h);
    out.hp.push_back(std::sqrt(2.0 * g.F(h)));
    out.hpp.push_back(g.f(h));
  };
  auto observer = [&](const DenseStep<1>& st) {
    while (next < grid.size() && grid[next] <= st.x1) {
      const double t = grid[next++];
      record(t, t == st.x1 ? st.y1[0] : st(t)[0]);
    }
    return true;
  };
  OdeOptions oo;
  oo.rtol = 1e-12;
  oo.atol = 1e-16 * h0;
  const OdeOutcome<1> res = integrate_ode<1>(rhs, t0, Vec<1>{h0}, t_max, oo, observer);
  if (res.status == OdeStatus::StepUnderflow) {
    throw NumericalError("profile_ode_g: step-size underflow at t=" + io::fmt(res.x));
  }
  return out;
}

OdeProfileChecks check_ode_profile(const OdeProfile& p, const Nonlinearity& g) {
  OdeProfileChecks c{true, true, true, true, 0.0, 0.0, true, 0.0};
  const std::size_t n = p.t.size();
  if (n == 0) return c;
  c.c1 = 2.0 * p.h.back();
  c.c2 = p.hp.back() * p.hp.back() + 1.0;
  const double slack = 1e-10;
  for (std::size_t i = 0; i < n; ++i) {
    if (p.t[i] * p.hp[i] > 2.0 * p.h[i] * (1.0 + slack)) c.has_bound = false;
    if (i > 0) {
      if (!(p.h[i] > p.h[i - 1])) c.h_increasing = false;
      if (!(p.hp[i] > p.hp[i - 1] * (1.0 - slack))) c.hp_increasing = false;
      if (p.hpp[i] > p.hpp[i - 1] * (1.0 + slack)) c.hpp_nonincreasing = false;
    }
    const double gh = g.f(p.h[i]);
    for (double q : {0.5, 1.0, 1.5, 2.0}) {
      if (std::pow(p.hp[i], q) > (c.c1 * gh + c.c2) * (1.0 + slack)) c.lh_bound = false;
    }
    c.power_bound = std::max(c.power_bound, p.h[i] / std::pow(p.t[i], p.beta));
  }
  return c;
}

std::string ode_profile_csv(const OdeProfile& p) {
  io::Csv csv({"t", "h", "h_prime", "h_second"});
  csv.comment("alpha=" + io::fmt(p.alpha) + " C=" + io::fmt(p.C));
  for (std::size_t i = 0; i < p.t.size(); ++i) csv.row({p.t[i], p.h[i], p.hp[i], p.hpp[i]});
  return csv.str();
}

}  // namespace sellab
