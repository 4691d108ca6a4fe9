#include "sellab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace sellab {

std::string describe(const ConvergenceVerdict& v) {
  char buf[160];
  if (const auto* c = std::get_if<Convergent>(&v)) {
    std::snprintf(buf, sizeof buf, "Convergent(value=%.17g, err=%.3g)", c->value, c->err);
  } else if (const auto* d = std::get_if<Divergent>(&v)) {
    std::snprintf(buf, sizeof buf, "Divergent(slope=%.6g)", d->growth_exponent);
  } else {
    return "Inconclusive(" + std::get<Inconclusive>(v).diagnostics + ")";
  }
  return buf;
}

std::string to_string(Classification c) {
  switch (c) {
    case Classification::Bounded: return "Bounded";
    case Classification::EntireLarge: return "EntireLarge";
    case Classification::BoundaryBlowup: return "BoundaryBlowup";
    case Classification::NoSolution: return "NoSolution";
    case Classification::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

double RadialSolution::sup_u() const {
  double s = -kInf;
  for (double x : u) s = std::max(s, x);
  return s;
}

// ------------------------------------------------------------------ limits

LimitEstimate levin_u(std::span<const double> s, int order) {
  const std::size_t n = s.size();
  if (n == 0) throw PreconditionError("levin_u: empty sequence");
  if (n < 3) return {s.back(), n == 2 ? std::fabs(s[1] - s[0]) : kInf};
  // Terms a_i = s_i - s_{i-1}; index i counts from the start of the window.
  auto transform = [&](std::size_t first, int k) -> double {
    double num = 0.0, den = 0.0, binom = 1.0;
    const double beta = 1.0;
    for (int j = 0; j <= k; ++j) {
      const std::size_t i = first + j;
      const double a = i == 0 ? s[0] : s[i] - s[i - 1];
      if (a == 0.0) return std::numeric_limits<double>::quiet_NaN();
      const double w = (beta + static_cast<double>(i)) * a;
      const double c = binom * std::pow((beta + first + j) / (beta + first + k), k - 1) / w;
      const double sign = (j % 2 == 0) ? 1.0 : -1.0;
      num += sign * c * s[i];
      den += sign * c;
      binom = binom * (k - j) / (j + 1);
    }
    return num / den;
  };
  const int k = std::min<int>(order, static_cast<int>(n) - 1);
  const double hi = transform(n - 1 - k, k);
  const double lo = transform(n - k, k - 1);
  if (!std::isfinite(hi) || !std::isfinite(lo)) {
    return {s.back(), std::fabs(s[n - 1] - s[n - 2])};
  }
  return {hi, std::fabs(hi - lo)};
}

double aitken(double x0, double x1, double x2) {
  const double d1 = x1 - x0, d2 = x2 - x1;
  const double den = d2 - d1;
  if (den == 0.0 || !std::isfinite(den)) return x2;
  return x2 - d2 * d2 / den;
}

LimitEstimate richardson(std::span<const double> values, double ratio, double p) {
  const std::size_t n = values.size();
  if (n == 0) throw PreconditionError("richardson: empty sequence");
  if (n == 1) return {values[0], kInf};
  std::vector<double> row(values.begin(), values.end());
  double prev_best = row.back();
  double best = row.back();
  for (std::size_t level = 1; level < n; ++level) {
    const double factor = std::pow(ratio, -(p + static_cast<double>(level - 1)));
    std::vector<double> next(row.size() - 1);
    for (std::size_t i = 0; i + 1 < row.size(); ++i) {
      next[i] = (factor * row[i + 1] - row[i]) / (factor - 1.0);
    }
    prev_best = best;
    best = next.back();
    row = std::move(next);
  }
  return {best, std::fabs(best - prev_best)};
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(std::fabs(y[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  return (n * sxy - sx * sy) / den;
}

// ------------------------------------------------------------ root finding

double find_root_monotone(const RealFn& fn, double target, double lo, double hi, double tol) {
  if (!(lo < hi)) throw PreconditionError("find_root_monotone: need lo < hi");
  double flo = fn(lo) - target;
  if (flo == 0.0) return lo;
  double fhi = fn(hi) - target;
  const double width0 = hi - lo;
  for (int i = 0; i < 60 && (flo > 0) == (fhi > 0) && fhi != 0.0; ++i) {
    hi = lo + 2.0 * (hi - lo);
    fhi = fn(hi) - target;
  }
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) {
    throw NumericalError("find_root_monotone: no bracket for target " + std::to_string(target) +
                         " starting from width " + std::to_string(width0));
  }
  // Illinois false position with a bisection safeguard.
  double a = lo, b = hi, fa = flo, fb = fhi;
  int side = 0;
  for (int it = 0; it < 400; ++it) {
    double x = (a * fb - b * fa) / (fb - fa);
    if (!(x > a && x < b) || it % 4 == 3) x = 0.5 * (a + b);
    const double fx = fn(x) - target;
    if (std::fabs(fx) <= tol || fx == 0.0) return x;
    if ((fx > 0) == (fa > 0)) {
      a = x;
      fa = fx;
      if (side == -1) fb *= 0.5;
      side = -1;
    } else {
      b = x;
      fb = fx;
      if (side == 1) fa *= 0.5;
      side = 1;
    }
    if (b - a <= tol * (1.0 + std::fabs(x))) return 0.5 * (a + b);
  }
  return 0.5 * (a + b);
}

// --------------------------------------------------------- interpolation

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw PreconditionError("MonotoneCubic: need >= 2 matching points");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(x_[i] > x_[i - 1])) throw PreconditionError("MonotoneCubic: abscissae not increasing");
  }
  std::vector<double> d(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) d[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
  m_.assign(n, 0.0);
  m_[0] = d[0];
  m_[n - 1] = d[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (d[i - 1] * d[i] <= 0.0) {
      m_[i] = 0.0;
    } else {
      // weighted harmonic mean (Fritsch-Butland form of the Fritsch-Carlson limiter)
      const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
      const double w1 = 2 * h1 + h0, w2 = h1 + 2 * h0;
      m_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
    }
  }
}

std::size_t MonotoneCubic::locate(double x) const {
  if (!(x >= x_.front() && x <= x_.back())) {
    throw PreconditionError("MonotoneCubic: " + std::to_string(x) + " outside [" +
                            std::to_string(x_.front()) + ", " + std::to_string(x_.back()) + "]");
  }
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t i = static_cast<std::size_t>(it - x_.begin());
  if (i == 0) i = 1;
  if (i >= x_.size()) i = x_.size() - 1;
  return i - 1;
}

double MonotoneCubic::operator()(double x) const {
  const std::size_t i = locate(x);
  const double h = x_[i + 1] - x_[i];
  const double s = (x - x_[i]) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
  return h00 * y_[i] + h10 * h * m_[i] + h01 * y_[i + 1] + h11 * h * m_[i + 1];
}

double MonotoneCubic::derivative(double x) const {
  const std::size_t i = locate(x);
  const double h = x_[i + 1] - x_[i];
  const double s = (x - x_[i]) / h;
  const double d00 = 6 * s * (s - 1), d10 = (1 - s) * (1 - 3 * s);
  const double d01 = -d00, d11 = s * (3 * s - 2);
  return (d00 * y_[i] + d01 * y_[i + 1]) / h + d10 * m_[i] + d11 * m_[i + 1];
}

std::vector<double> cumulative_integral(std::span<const double> x, std::span<const double> f) {
  const std::size_t n = x.size();
  if (f.size() != n) throw PreconditionError("cumulative_integral: size mismatch");
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  const double g = 1.0 / std::sqrt(3.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::size_t lo = i == 0 ? 0 : i - 1;
    std::size_t hi = std::min(n - 1, lo + 3);
    if (hi - lo < 3 && n >= 4) lo = hi - 3;
    auto lagrange = [&](double t) {
      double s = 0.0;
      for (std::size_t j = lo; j <= hi; ++j) {
        double w = 1.0;
        for (std::size_t k = lo; k <= hi; ++k) {
          if (k != j) w *= (t - x[k]) / (x[j] - x[k]);
        }
        s += w * f[j];
      }
      return s;
    };
    const double c = 0.5 * (x[i] + x[i + 1]);
    const double h = 0.5 * (x[i + 1] - x[i]);
    out[i + 1] = out[i] + h * (lagrange(c - g * h) + lagrange(c + g * h));
  }
  return out;
}

std::vector<double> geometric_grid(double lo, double hi, int points_per_octave) {
  if (!(lo > 0.0 && hi > lo) || points_per_octave < 1) {
    throw PreconditionError("geometric_grid: need 0 < lo < hi and points_per_octave >= 1");
  }
  std::vector<double> g;
  for (int k = 0;; ++k) {
    const double t = hi * std::exp2(-static_cast<double>(k) / points_per_octave);
    if (t < lo * (1.0 + 1e-12)) break;
    g.push_back(t);
  }
  g.push_back(lo);
  std::reverse(g.begin(), g.end());
  return g;
}

}  // namespace sellab
