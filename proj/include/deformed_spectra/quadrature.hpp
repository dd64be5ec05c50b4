#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <queue>
#include <stdexcept>

namespace deformed_spectra {

// Globally adaptive Gauss-Kronrod (31-point panels): the worst panel is
// bisected until the summed error estimate meets tol or the panel budget
// runs out.  Integrands built from exp(x)-1 and friends carry rounding
// noise near their edges, and a per-panel criterion would chase that noise
// down to the bottom of the recursion.
template <class F>
double integrate(F f, double a, double b, double tol = 1e-12, double* err = nullptr, int max_panels = 1000) {
  if (a == b) return 0.0;
  struct Panel {
    double a, b, v, e;
    bool operator<(const Panel& o) const { return e < o.e; }
  };
  auto eval = [&](double lo, double hi) {
    // Boost's non-adaptive error report is not |K - G|, so form it here.
    double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 0, 0.0);
    double g = boost::math::quadrature::gauss<double, 15>::integrate(f, lo, hi);
    return Panel{lo, hi, v, std::abs(v - g)};
  };
  std::priority_queue<Panel> q;
  Panel first = eval(a, b);
  double total = first.v, total_err = first.e;
  q.push(first);
  const double floor = 64.0 * std::numeric_limits<double>::epsilon();
  while (total_err > std::max(tol, floor) * std::abs(total) && total_err > 1e-300 && int(q.size()) < max_panels) {
    Panel w = q.top();
    // The worst panel is already at rounding level: nothing left to gain.
    if (w.e <= 16.0 * std::numeric_limits<double>::epsilon() *
                   std::max(std::abs(w.v), std::abs(total) * (w.b - w.a) / (b - a)))
      break;
    q.pop();
    double m = 0.5 * (w.a + w.b);
    if (!(m > w.a && m < w.b)) {
      q.push(Panel{w.a, w.b, w.v, 0.0});  // cannot split further; freeze it
      continue;
    }
    Panel l = eval(w.a, m), r = eval(m, w.b);
    total += l.v + r.v - w.v;
    total_err += l.e + r.e - w.e;
    q.push(l);
    q.push(r);
  }
  // Re-sum to shed the drift of the running totals.
  double v = 0.0, e = 0.0;
  while (!q.empty()) {
    v += q.top().v;
    e += q.top().e;
    q.pop();
  }
  if (err) *err = e;
  if (!std::isfinite(v)) throw std::runtime_error("quadrature did not converge");
  return v;
}

// tanh-sinh, suited to integrable endpoint singularities.  Oscillatory
// integrands should be split into pieces: a single panel can stop early
// when two refinement levels agree by accident.
template <class F>
double integrate_singular(F f, double a, double b, double tol = 1e-13, int pieces = 1) {
  static thread_local boost::math::quadrature::tanh_sinh<double> ts(12);
  double v = 0.0;
  for (int i = 0; i < pieces; ++i)
    v += ts.integrate(f, a + (b - a) * i / pieces, a + (b - a) * (i + 1) / pieces, tol);
  if (!std::isfinite(v)) throw std::runtime_error("quadrature did not converge");
  return v;
}

template <class F>
std::complex<double> integrate_complex(F f, double a, double b, double tol = 1e-12) {
  double re = integrate([&](double t) { return std::real(f(t)); }, a, b, tol);
  double im = integrate([&](double t) { return std::imag(f(t)); }, a, b, tol);
  return {re, im};
}

}  // namespace deformed_spectra
