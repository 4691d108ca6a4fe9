#pragma once

// Dormand-Prince 5(4) with Hairer's continuous extension. Included from
// numerics.hpp.

#include <algorithm>
#include <cmath>

namespace sellab {

namespace detail {

struct Dp5 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                          a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432.0,
                          d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0,
                          d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

template <std::size_t D>
bool all_finite(const Vec<D>& y) {
  for (double v : y) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace detail

template <std::size_t D, class Rhs, class Observer>
OdeOutcome<D> integrate_ode(Rhs&& rhs, double x0, Vec<D> y0, double x_end,
                            const OdeOptions& opt, Observer&& observer) {
  using detail::Dp5;
  const double dir = x_end >= x0 ? 1.0 : -1.0;
  const double span = std::fabs(x_end - x0);
  if (span == 0.0) return {OdeStatus::Completed, x0, y0, 0};

  auto safe_rhs = [&](double x, const Vec<D>& y, Vec<D>& out) -> bool {
    if (!detail::all_finite(y)) return false;
    try {
      out = rhs(x, y);
    } catch (const DomainError&) {
      return false;
    }
    return detail::all_finite(out);
  };

  Vec<D> k1{};
  if (!safe_rhs(x0, y0, k1)) throw DomainError("ode right-hand side", x0);

  double h = opt.h0 > 0.0 ? opt.h0 : 0.0;
  if (h == 0.0) {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < D; ++i) {
      const double sc = opt.atol + opt.rtol * std::fabs(y0[i]);
      d0 += (y0[i] / sc) * (y0[i] / sc);
      d1 += (k1[i] / sc) * (k1[i] / sc);
    }
    d0 = std::sqrt(d0 / D);
    d1 = std::sqrt(d1 / D);
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * std::max(span, 1e-300) : 0.01 * d0 / d1;
    h = std::min({h, span, opt.h_max});
  }

  double x = x0;
  Vec<D> y = y0;
  long steps = 0;
  const double h_min_rel = 1e-14;
  double err_old = 1e-4;
  bool last_rejected = false;

  Vec<D> k2{}, k3{}, k4{}, k5{}, k6{}, k7{}, yt{}, y1{};
  while (dir * (x_end - x) > 0.0) {
    if (++steps > opt.max_steps) return {OdeStatus::StepUnderflow, x, y, steps};
    const double h_min = h_min_rel * std::max(std::fabs(x), span);
    if (h < h_min) return {OdeStatus::StepUnderflow, x, y, steps};
    bool final_step = false;
    if (h >= std::fabs(x_end - x)) {
      h = std::fabs(x_end - x);
      final_step = true;
    }
    const double hs = dir * h;

    bool ok = true;
    auto stage = [&](double cx, auto&& combine, Vec<D>& k) {
      if (!ok) return;
      for (std::size_t i = 0; i < D; ++i) yt[i] = y[i] + hs * combine(i);
      ok = safe_rhs(x + cx * hs, yt, k);
    };
    stage(Dp5::c2, [&](std::size_t i) { return Dp5::a21 * k1[i]; }, k2);
    stage(Dp5::c3, [&](std::size_t i) { return Dp5::a31 * k1[i] + Dp5::a32 * k2[i]; }, k3);
    stage(Dp5::c4,
          [&](std::size_t i) { return Dp5::a41 * k1[i] + Dp5::a42 * k2[i] + Dp5::a43 * k3[i]; },
          k4);
    stage(Dp5::c5,
          [&](std::size_t i) {
            return Dp5::a51 * k1[i] + Dp5::a52 * k2[i] + Dp5::a53 * k3[i] + Dp5::a54 * k4[i];
          },
          k5);
    stage(1.0,
          [&](std::size_t i) {
            return Dp5::a61 * k1[i] + Dp5::a62 * k2[i] + Dp5::a63 * k3[i] + Dp5::a64 * k4[i] +
                   Dp5::a65 * k5[i];
          },
          k6);
    if (ok) {
      for (std::size_t i = 0; i < D; ++i) {
        y1[i] = y[i] + hs * (Dp5::a71 * k1[i] + Dp5::a73 * k3[i] + Dp5::a74 * k4[i] +
                             Dp5::a75 * k5[i] + Dp5::a76 * k6[i]);
      }
      ok = safe_rhs(x + hs, y1, k7);
    }

    double err = kInf;
    if (ok) {
      double acc = 0.0;
      for (std::size_t i = 0; i < D; ++i) {
        const double e = hs * (Dp5::e1 * k1[i] + Dp5::e3 * k3[i] + Dp5::e4 * k4[i] +
                               Dp5::e5 * k5[i] + Dp5::e6 * k6[i] + Dp5::e7 * k7[i]);
        const double sc = opt.atol + opt.rtol * std::max(std::fabs(y[i]), std::fabs(y1[i]));
        acc += (e / sc) * (e / sc);
      }
      err = std::sqrt(acc / D);
      if (!std::isfinite(err)) err = kInf;
    }

    if (err <= 1.0) {
      DenseStep<D> step;
      step.x0 = x;
      step.x1 = final_step ? x_end : x + hs;
      step.y0 = y;
      step.y1 = y1;
      for (std::size_t i = 0; i < D; ++i) {
        step.rc[0][i] = y[i];
        step.rc[1][i] = y1[i] - y[i];
        step.rc[2][i] = hs * k1[i] - step.rc[1][i];
        step.rc[3][i] = step.rc[1][i] - hs * k7[i] - step.rc[2][i];
        step.rc[4][i] = hs * (Dp5::d1 * k1[i] + Dp5::d3 * k3[i] + Dp5::d4 * k4[i] +
                              Dp5::d5 * k5[i] + Dp5::d6 * k6[i] + Dp5::d7 * k7[i]);
      }
      x = step.x1;
      y = y1;
      k1 = k7;
      if (!observer(step)) return {OdeStatus::Stopped, x, y, steps};
      // PI controller (beta = 0.04)
      const double e = std::max(err, 1e-10);
      double fac = 0.9 * std::pow(e, -0.17) * std::pow(err_old, 0.04);
      fac = std::clamp(fac, 0.2, 10.0);
      if (last_rejected) fac = std::min(fac, 1.0);
      err_old = e;
      last_rejected = false;
      h = std::min(h * fac, opt.h_max);
    } else {
      const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
      h *= fac;
      last_rejected = true;
    }
  }
  return {OdeStatus::Completed, x, y, steps};
}

}  // namespace sellab
