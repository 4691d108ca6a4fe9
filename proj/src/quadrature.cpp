#include <algorithm>
#include <cmath>
#include <queue>

#include "sellab/numerics.hpp"

namespace sellab {

namespace {

constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, err;
  bool operator<(const Panel& o) const { return err < o.err; }
};

Panel kronrod15(const RealFn& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double resk = fc * kWgk[7];
  double resg = fc * kWg[3];
  double resabs = std::fabs(resk);
  for (int j = 0; j < 7; ++j) {
    const double x = h * kXgk[j];
    const double f1 = f(c - x);
    const double f2 = f(c + x);
    resk += kWgk[j] * (f1 + f2);
    resabs += kWgk[j] * (std::fabs(f1) + std::fabs(f2));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  const double value = resk * h;
  double err = std::fabs((resk - resg) * h);
  // roundoff floor
  err = std::max(err, 50.0 * std::numeric_limits<double>::epsilon() * std::fabs(resabs * h));
  if (!std::isfinite(value) || !std::isfinite(err)) {
    throw NumericalError("quadrature: non-finite integrand on [" + std::to_string(a) + ", " +
                         std::to_string(b) + "]");
  }
  return {a, b, value, err};
}

}  // namespace

QuadResult gauss_kronrod(const RealFn& f, double a, double b, double abs_tol, double rel_tol,
                         int max_intervals) {
  if (a == b) return {0.0, 0.0, 0};
  // below this the per-panel roundoff floor cannot be beaten
  rel_tol = std::max(rel_tol, 200.0 * std::numeric_limits<double>::epsilon());
  std::priority_queue<Panel> heap;
  Panel first = kronrod15(f, a, b);
  double value = first.value;
  double err = first.err;
  heap.push(first);
  int n = 1;
  double frozen_err = 0.0;  // panels too narrow to split
  while (err > std::max(abs_tol, rel_tol * std::fabs(value))) {
    if (heap.empty()) break;
    if (n >= max_intervals) {
      throw NumericalError("quadrature: subdivision limit reached (err=" + std::to_string(err) +
                           ")");
    }
    Panel p = heap.top();
    heap.pop();
    const double m = 0.5 * (p.a + p.b);
    if (!(m > p.a && m < p.b) || (p.b - p.a) < 1e-15 * (std::fabs(p.a) + std::fabs(p.b))) {
      frozen_err += p.err;
      continue;
    }
    Panel l = kronrod15(f, p.a, m);
    Panel r = kronrod15(f, m, p.b);
    value += l.value + r.value - p.value;
    err += l.err + r.err - p.err;
    heap.push(l);
    heap.push(r);
    ++n;
  }
  // recompute the sums to shed accumulated cancellation
  double v = 0.0, e = frozen_err;
  while (!heap.empty()) {
    v += heap.top().value;
    e += heap.top().err;
    heap.pop();
  }
  return {v, e, n};
}

namespace {

// Local power p of |f| at the endpoint x0 approached from direction dir.
double endpoint_power(const RealFn& f, double x0, double dir, double w) {
  try {
    const double d1 = w * 1e-6, d2 = w * 1e-9;
    const double f1 = std::fabs(f(x0 + dir * d1));
    const double f2 = std::fabs(f(x0 + dir * d2));
    if (!(f1 > 0.0) || !(f2 > 0.0) || !std::isfinite(f1) || !std::isfinite(f2)) return 0.0;
    return std::log(f1 / f2) / std::log(d1 / d2);
  } catch (const DomainError&) {
    return 0.0;
  }
}

// Integrate f over the half [x0, x0 + dir*w] with grading toward x0.
QuadResult graded_half(const RealFn& f, double x0, double dir, double w, double tol) {
  const double p = endpoint_power(f, x0, dir, w);
  if (p <= -1.0 + 1e-3) {
    throw NumericalError("non-integrable endpoint singularity (local power " + std::to_string(p) +
                         ")");
  }
  double beta = 1.0;
  if (p < -1e-3) beta = std::ceil(2.0 / (p + 1.0));
  RealFn g;
  if (beta == 1.0) {
    g = [&](double s) { return f(x0 + dir * w * s); };
  } else {
    g = [&, beta](double s) {
      const double sb = std::pow(s, beta - 1.0);
      return f(x0 + dir * w * sb * s) * beta * sb;
    };
  }
  QuadResult r = gauss_kronrod(g, 0.0, 1.0, 0.25 * tol / w, 0.25 * tol, 8000);
  return {r.value * w, r.err * w, r.intervals};
}

}  // namespace

QuadResult integrate_finite(const RealFn& f, double a, double b, double tol) {
  if (!(a < b)) throw PreconditionError("integrate_finite: need a < b");
  const double w = 0.5 * (b - a);
  QuadResult left = graded_half(f, a, 1.0, w, tol);
  QuadResult right = graded_half(f, b, -1.0, w, tol);
  return {left.value + right.value, left.err + right.err, left.intervals + right.intervals};
}

}  // namespace sellab
