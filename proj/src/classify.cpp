#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sellab/numerics.hpp"

namespace sellab {

namespace {

struct Samples {
  std::vector<double> t;
  std::vector<double> f;
  bool underflow = false;  // decayed to zero: faster than any power
  bool overflow = false;
  std::string stop_reason;
};

Samples sample_doublings(const RealFn& fn, double a, int max_doublings, double t_limit) {
  Samples s;
  for (int j = 0; j <= max_doublings; ++j) {
    const double t = std::ldexp(a, j);
    if (t > t_limit) {
      s.stop_reason = "t_limit";
      break;
    }
    double v;
    try {
      v = fn(t);
    } catch (const DomainError& e) {
      s.stop_reason = std::string("domain: ") + e.what();
      break;
    }
    if (std::isnan(v)) {
      s.stop_reason = "nan";
      break;
    }
    if (std::isinf(v)) {
      s.overflow = true;
      break;
    }
    if (v == 0.0 && !s.f.empty() && s.f.back() > 0.0) {
      s.underflow = true;
      break;
    }
    if (!(v > 0.0)) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "integrand not positive at t=%.17g (value %.17g)", t, v);
      throw PreconditionError(buf);
    }
    s.t.push_back(t);
    s.f.push_back(v);
  }
  return s;
}

double fit_slope_tail(const Samples& s, int points) {
  const std::size_t n = s.t.size();
  const std::size_t k = std::min<std::size_t>(n, static_cast<std::size_t>(points));
  return loglog_slope(std::span<const double>(s.t).subspan(n - k),
                      std::span<const double>(s.f).subspan(n - k));
}

double panel(const RealFn& fn, double lo, double hi, double tol, double& err) {
  QuadResult r = gauss_kronrod(fn, lo, hi, 1e-300, std::min(0.1 * tol, 1e-13), 20000);
  err += r.err;
  return r.value;
}

// Levin-u over several windows and orders; keeps the estimate whose
// order-to-order and window-to-window changes are smallest.
LimitEstimate best_levin(const std::vector<double>& S) {
  const std::size_t n = S.size();
  LimitEstimate best{S.back(), kInf};
  for (std::size_t end = std::max<std::size_t>(n / 2, 6); end <= n; ++end) {
    for (int k : {6, 8, 10, 12}) {
      if (static_cast<std::size_t>(k) + 2 > end) continue;
      std::span<const double> w(S.data(), end);
      LimitEstimate a = levin_u(w, k);
      LimitEstimate b = levin_u(w.first(end - 1), k);
      const double err = std::max(a.err, std::fabs(a.value - b.value));
      if (err < best.err) best = {a.value, err};
    }
  }
  return best;
}

double linear_fit(std::span<const double> x, std::span<const double> y, double* rms) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icpt = (sy - slope * sx) / n;
  if (rms) {
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = y[i] - (icpt + slope * x[i]);
      r += d * d;
    }
    *rms = std::sqrt(r / n);
  }
  return slope;
}

// Direct panel summation over doubling panels for the borderline band.
ConvergenceVerdict fallback(const RealFn& fn, double a, double tol, const TailOptions& opt,
                            double slope) {
  const int J = opt.fallback_panels;
  std::vector<double> P, S, idx;
  double qerr = 0.0, sum = 0.0;
  for (int j = 0; j < J; ++j) {
    const double lo = std::ldexp(a, j), hi = std::ldexp(a, j + 1);
    if (hi > opt.t_limit) break;
    const double p = panel(fn, lo, hi, tol, qerr);
    if (!(p > 0.0)) break;
    P.push_back(p);
    sum += p;
    S.push_back(sum);
    idx.push_back(std::log2(lo) + 0.5);
  }
  const std::size_t n = P.size();
  if (n < 8) {
    return Inconclusive{"too few panels for direct summation", slope};
  }
  // Geometric panels are what an exact power produces.
  const std::size_t h = n / 2;
  std::vector<double> logP(n), jj(n);
  for (std::size_t i = 0; i < n; ++i) {
    logP[i] = std::log(P[i]);
    jj[i] = static_cast<double>(i);
  }
  double rms = 0.0;
  const double gslope = linear_fit(std::span<const double>(jj).subspan(h),
                                   std::span<const double>(logP).subspan(h), &rms);
  if (rms < 1e-6) {
    const double r = std::exp(gslope);
    if (r < 1.0 - 1e-9) {
      const double tail = P.back() * r / (1.0 - r);
      const double v = sum + tail;
      const double err = qerr + std::fabs(tail) * 1e-6;
      if (err <= tol * (1.0 + std::fabs(v))) return Convergent{v, err};
      return Inconclusive{"geometric panels but tail error above tolerance", slope};
    }
    return Divergent{slope};
  }
  // Otherwise panels decay like a power of the panel index (log-corrected
  // integrands); compare the early and late local exponents.
  auto q_on = [&](std::size_t from, std::size_t to) {
    std::vector<double> x(idx.begin() + from, idx.begin() + to);
    std::vector<double> y(P.begin() + from, P.begin() + to);
    for (double& xi : x) xi = std::max(xi, 0.5);
    return -loglog_slope(x, y);
  };
  const double q_early = q_on(n / 4, n / 2 + 1);
  const double q_late = q_on(n / 2, n);
  char diag[200];
  if (q_late > 1.0 + opt.delta) {
    LimitEstimate L = best_levin(S);
    const double err = L.err + qerr;
    if (err <= tol * (1.0 + std::fabs(L.value))) return Convergent{L.value, err};
    std::snprintf(diag, sizeof diag,
                  "panel exponent q=%.4g indicates convergence but extrapolation error %.3g "
                  "exceeds tolerance",
                  q_late, err);
    return Inconclusive{diag, slope};
  }
  if (q_late < 1.0 - opt.delta && std::fabs(q_late - q_early) < 0.25) return Divergent{slope};
  std::snprintf(diag, sizeof diag,
                "borderline: log-log slope %.4g, panel exponents early %.4g late %.4g", slope,
                q_early, q_late);
  return Inconclusive{diag, slope};
}

}  // namespace

ConvergenceVerdict classify_tail_integral(const RealFn& fn, double a, double tol,
                                          const TailOptions& opt) {
  if (!(a > 0.0)) throw PreconditionError("classify_tail_integral: need a > 0");
  Samples s = sample_doublings(fn, a, opt.max_doublings, opt.t_limit);
  if (s.overflow) return Divergent{kInf};
  if (s.t.size() < 3 && !s.underflow) {
    return Inconclusive{"too few samples (" + s.stop_reason + ")", std::nan("")};
  }
  const double slope = s.underflow ? -kInf : fit_slope_tail(s, opt.slope_points);

  if (slope > -1.0 + opt.delta) return Divergent{slope};
  if (slope >= -1.0 - opt.delta) return fallback(fn, a, tol, opt, slope);

  // Convergent branch: sum doubling panels, close with a power-law tail
  // whose local exponent comes from the last two samples.
  double qerr = 0.0, sum = 0.0;
  std::vector<double> partial;
  double tail = 0.0, tail_global = 0.0;
  const std::size_t n = s.t.size();
  for (std::size_t j = 0; j + 1 < n || (s.underflow && j < n); ++j) {
    const double lo = s.t[j];
    const double hi = std::ldexp(a, static_cast<int>(j) + 1);
    sum += panel(fn, lo, hi, tol, qerr);
    partial.push_back(sum);
    if (j + 1 >= n) {
      tail = 0.0;  // integrand underflowed beyond hi
      tail_global = 0.0;
      break;
    }
    const double f0 = s.f[j], f1 = s.f[j + 1];
    const double s_loc = std::log(f1 / f0) / std::log(2.0);
    tail = s_loc < -1.0 ? hi * f1 / (-s_loc - 1.0) : kInf;
    tail_global = hi * f1 / (-slope - 1.0);
    if (std::fabs(tail) <= 0.01 * tol * (1.0 + std::fabs(sum))) break;
  }
  double value = sum + tail;
  double err = qerr + std::fabs(tail - tail_global);
  if (err <= tol * (1.0 + std::fabs(value))) return Convergent{value, err};
  // Model tail disagrees: extrapolate the panel sums instead.
  if (partial.size() >= 6) {
    LimitEstimate L = best_levin(partial);
    const double lerr = L.err + qerr;
    if (lerr <= tol * (1.0 + std::fabs(L.value))) return Convergent{L.value, lerr};
  }
  ConvergenceVerdict fb = fallback(fn, a, tol, opt, slope);
  if (is_convergent(fb)) return fb;
  char diag[200];
  std::snprintf(diag, sizeof diag,
                "slope %.4g indicates convergence; value not resolved to tolerance (tail err %.3g)",
                slope, err);
  return Inconclusive{diag, slope};
}

ConvergenceVerdict classify_origin_integral(const RealFn& fn, double b, double tol,
                                            const TailOptions& opt) {
  if (!(b > 0.0)) throw PreconditionError("classify_origin_integral: need b > 0");
  RealFn g = [&fn](double u) { return fn(1.0 / u) / (u * u); };
  TailOptions o = opt;
  o.t_limit = std::isfinite(opt.t_limit) ? opt.t_limit : kInf;
  ConvergenceVerdict v = classify_tail_integral(g, 1.0 / b, tol, o);
  if (auto* d = std::get_if<Divergent>(&v)) d->growth_exponent = -d->growth_exponent - 2.0;
  if (auto* i = std::get_if<Inconclusive>(&v)) i->slope = -i->slope - 2.0;
  return v;
}

}  // namespace sellab
