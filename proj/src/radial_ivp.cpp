#include <algorithm>
#include <cmath>

#include "sellab/numerics.hpp"

namespace sellab {

RadialSolution integrate_radial_ivp(const RadialRhs& rhs, double u0, double du0, int N,
                                    double r_max, double tol, const RadialIvpOptions& opt) {
  if (N < 1) throw PreconditionError("integrate_radial_ivp: N must be >= 1");
  if (!(r_max > 0.0)) throw PreconditionError("integrate_radial_ivp: r_max must be positive");
  if (!opt.signed_mode && !(u0 > 0.0)) {
    throw PreconditionError("integrate_radial_ivp: u0 must be positive (signed mode off)");
  }
  const double thr = opt.blowup_threshold;

  RadialSolution sol;
  sol.dimension = N;

  double r0 = 0.0;
  Vec<2> y0{u0, du0};
  if (N > 1) {
    r0 = opt.start_fraction * r_max;
    double g0;
    try {
      g0 = rhs(0.0, u0, du0);
    } catch (const DomainError&) {
      g0 = rhs(r0, u0, du0);
    }
    y0 = {u0 + du0 * r0 + g0 * r0 * r0 / (2.0 * N), du0 + g0 * r0 / N};
  }

  auto f = [&](double r, const Vec<2>& y) -> Vec<2> {
    const double g = rhs(r, y[0], y[1]);
    return {y[1], g - (N - 1) * y[1] / r};
  };
  auto f1 = [&](double r, const Vec<2>& y) -> Vec<2> { return {y[1], rhs(r, y[0], y[1])}; };

  std::vector<double> radii = opt.output_radii;
  std::sort(radii.begin(), radii.end());
  std::size_t next = 0;
  auto record = [&](double r, const Vec<2>& y) {
    sol.r.push_back(r);
    sol.u.push_back(y[0]);
    sol.du.push_back(y[1]);
  };
  // points at or below the series start radius
  if (radii.empty()) {
    record(0.0, {u0, du0});
    if (r0 > 0.0) record(r0, y0);
  } else {
    while (next < radii.size() && radii[next] <= r0) {
      const double r = radii[next++];
      if (r0 == 0.0) {
        record(r, y0);
      } else {
        const double w = r / r0;
        record(r, {u0 + w * (y0[0] - u0), du0 + w * (y0[1] - du0)});
      }
    }
  }

  bool blew_up = false;
  auto observer = [&](const DenseStep<2>& st) -> bool {
    const bool over = std::fabs(st.y1[0]) > thr || std::fabs(st.y1[1]) > thr;
    double x_end = st.x1;
    if (over) {
      auto excess = [&](double x) {
        Vec<2> y = st(x);
        return std::max(std::fabs(y[0]), std::fabs(y[1])) - thr;
      };
      double lo = st.x0, hi = st.x1;
      for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) > 0.0 ? hi : lo) = mid;
      }
      x_end = hi;
      sol.blowup_radius = hi;
      blew_up = true;
    }
    if (radii.empty()) {
      record(x_end, over ? st(x_end) : st.y1);
    } else {
      while (next < radii.size() && radii[next] <= x_end) {
        const double r = radii[next++];
        record(r, r == st.x1 ? st.y1 : st(r));
      }
    }
    return !over;
  };

  OdeOptions oo;
  oo.rtol = tol;
  oo.atol = tol * 1e-2;
  oo.h_max = r_max / 16.0;
  OdeOutcome<2> out = N > 1 ? integrate_ode<2>(f, r0, y0, r_max, oo, observer)
                            : integrate_ode<2>(f1, r0, y0, r_max, oo, observer);
  sol.iterations = static_cast<int>(std::min<long>(out.steps, 2147483647L));
  if (out.status == OdeStatus::StepUnderflow) {
    throw NumericalError("integrate_radial_ivp: step-size underflow at r=" +
                         std::to_string(out.x));
  }
  sol.classification = blew_up ? Classification::BoundaryBlowup : Classification::Bounded;
  return sol;
}

}  // namespace sellab
