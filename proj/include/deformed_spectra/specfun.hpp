#pragma once

#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "tridiag.hpp"

namespace deformed_spectra {

inline double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma: argument must be positive");
  return std::lgamma(x);
}

// Pairwise summation keeps rounding growth at O(log n).
inline double pairwise_sum(const double* v, size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

// 2F1(-n, b; c; x), a polynomial of degree n.
inline double hyp2f1_terminating(int n, double b, double c, double x) {
  if (n < 0) throw std::invalid_argument("hyp2f1_terminating: n must be >= 0");
  std::vector<double> terms(n + 1);
  double t = 1.0;
  terms[0] = 1.0;
  for (int k = 0; k < n; ++k) {
    double den = (c + k) * (k + 1);
    if (c + k == 0.0) throw std::domain_error("hyp2f1_terminating: pole in c");
    t *= (-n + k) * (b + k) / den * x;
    terms[k + 1] = t;
  }
  return pairwise_sum(terms.data(), terms.size());
}

inline double generalized_laguerre(int n, double a, double x) {
  if (n == 0) return 1.0;
  double l0 = 1.0, l1 = 1.0 + a - x;
  for (int k = 1; k < n; ++k) {
    double l2 = ((2.0 * k + 1.0 + a - x) * l1 - (k + a) * l0) / (k + 1.0);
    l0 = l1;
    l1 = l2;
  }
  return l1;
}

// P_n^{(a,b)}(x) by the three-term recurrence.
inline double jacobi_polynomial(int n, double a, double b, double x) {
  if (n == 0) return 1.0;
  double p0 = 1.0, p1 = 0.5 * (a - b + (a + b + 2.0) * x);
  for (int k = 1; k < n; ++k) {
    double s = 2.0 * k + a + b;
    double c1 = 2.0 * (k + 1) * (k + a + b + 1) * s;
    double c2 = (s + 1) * (a * a - b * b);
    double c3 = s * (s + 1) * (s + 2);
    double c4 = 2.0 * (k + a) * (k + b) * (s + 2);
    double p2 = ((c2 + c3 * x) * p1 - c4 * p0) / c1;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

// Normalization of the trigonometric Poschl-Teller eigenfunctions on (0, pi/2).
inline double pt_normalization(int n, double alpha, double beta) {
  double s = std::log(2.0 * (2.0 * n + alpha + beta)) + log_gamma(n + beta + 0.5) + log_gamma(n + alpha + beta) -
             log_gamma(n + alpha + 0.5) - log_gamma(n + 1.0) - 2.0 * log_gamma(beta + 0.5);
  return std::exp(0.5 * s);
}

inline double log_beta(double a, double b) { return log_gamma(a) + log_gamma(b) - log_gamma(a + b); }

// ---------------------------------------------------------------------------
// Confluent Heun function in the convention
//   y'' - P(q)/(q(q-1)) y' - (A q + B)/(2 q (q-1)) y = 0,
//   P = -alpha q^2 + (alpha - beta - gamma - 2) q + beta + 1,
//   A = (-beta - gamma - 2) alpha - 2 delta,
//   B = (beta + 1) alpha - (gamma + 1) beta - 2 eta - gamma,
// analytic at q = 0 with y(0) = 1.

struct HeunParams {
  double alpha = 0, beta = 0, gamma = 0, delta = 0, eta = 0;
  double A() const { return (-beta - gamma - 2.0) * alpha - 2.0 * delta; }
  double B() const { return (beta + 1.0) * alpha - (gamma + 1.0) * beta - 2.0 * eta - gamma; }
};

namespace detail {
using state2 = std::array<double, 2>;

struct HeunRhs {
  HeunParams p;
  void operator()(const state2& y, state2& dy, double q) const {
    double P = -p.alpha * q * q + (p.alpha - p.beta - p.gamma - 2.0) * q + p.beta + 1.0;
    double den = q * (q - 1.0);
    dy[0] = y[1];
    dy[1] = (P * y[1] + 0.5 * (p.A() * q + p.B()) * y[0]) / den;
  }
};
}  // namespace detail

// Series coefficients about q = 0.
inline std::vector<double> heun_series_coefficients(const HeunParams& p, int count) {
  std::vector<double> c(count, 0.0);
  c[0] = 1.0;
  const double mu = 0.5 * p.B();
  const double nu_mu = -0.5 * p.A();
  for (int k = 0; k + 1 < count; ++k) {
    double rhs = (k * (k - 1.0) - (p.alpha - p.beta - p.gamma - 2.0) * k - mu) * c[k];
    if (k >= 1) rhs += (p.alpha * (k - 1.0) + nu_mu) * c[k - 1];
    double den = (k + 1.0) * (k + 1.0 + p.beta);
    if (den == 0.0) throw std::domain_error("heun series: resonant beta");
    c[k + 1] = rhs / den;
  }
  return c;
}

struct HeunValue {
  double y = 0, dy = 0;
  bool converged = true;
};

// Sums the Frobenius series at q (|q| < 1).  Reports non-convergence.
inline HeunValue heun_series(const HeunParams& p, double q, int max_terms = 4000) {
  HeunValue v;
  double c0 = 1.0, c1 = 0.0;  // c[k-1], c[k]
  const double mu = 0.5 * p.B();
  const double nu_mu = -0.5 * p.A();
  double ckm1 = 0.0, ck = 1.0;
  double qk = 1.0, s = 1.0, ds = 0.0, biggest = 1.0;
  int quiet = 0;
  for (int k = 0; k < max_terms; ++k) {
    double rhs = (k * (k - 1.0) - (p.alpha - p.beta - p.gamma - 2.0) * k - mu) * ck;
    if (k >= 1) rhs += (p.alpha * (k - 1.0) + nu_mu) * ckm1;
    double ckp1 = rhs / ((k + 1.0) * (k + 1.0 + p.beta));
    ds += (k + 1.0) * ckp1 * qk;
    qk *= q;
    double term = ckp1 * qk;
    s += term;
    biggest = std::max(biggest, std::abs(term));
    ckm1 = ck;
    ck = ckp1;
    if (std::abs(term) <= 1e-17 * std::abs(s) && std::abs(ckm1 * qk) <= 1e-17 * std::abs(s) * 4.0) {
      if (++quiet >= 3) {
        v.y = s;
        v.dy = ds;
        v.converged = biggest < 1e8 * std::max(1.0, std::abs(s));
        return v;
      }
    } else {
      quiet = 0;
    }
  }
  (void)c0;
  (void)c1;
  v.y = s;
  v.dy = ds;
  v.converged = false;
  return v;
}

// Integrates the Heun equation from q0 (state y0) to each of the sorted
// targets, returning (y, y') there.
inline std::vector<HeunValue> heun_integrate(const HeunParams& p, double q0, HeunValue y0,
                                            const std::vector<double>& targets, double rel_tol = 1e-12) {
  using namespace boost::numeric::odeint;
  detail::state2 st{y0.y, y0.dy};
  auto stepper = make_controlled(1e-14, rel_tol, runge_kutta_fehlberg78<detail::state2>());
  detail::HeunRhs rhs{p};
  std::vector<HeunValue> out;
  double q = q0;
  for (double t : targets) {
    if (t != q) {
      double dt = (t > q ? 1.0 : -1.0) * std::min(1e-3, std::abs(t - q));
      integrate_adaptive(stepper, rhs, st, q, t, dt);
      q = t;
    }
    if (!std::isfinite(st[0]) || !std::isfinite(st[1])) throw std::runtime_error("heun integration overflow");
    out.push_back({st[0], st[1], true});
  }
  return out;
}

inline constexpr double heun_series_limit = 0.5;

// Value of the normalized solution at q in [0, 1).
inline double heun_confluent(const HeunParams& p, double q) {
  if (q < 0.0 || q >= 1.0) throw std::domain_error("heun_confluent: q must lie in [0, 1)");
  if (q <= heun_series_limit) {
    auto v = heun_series(p, q);
    if (v.converged) return v.y;
  }
  double q0 = std::min(q, 0.2);
  HeunValue start = heun_series(p, q0);
  if (!start.converged) {
    q0 = 0.05;
    start = heun_series(p, q0);
    if (!start.converged) throw std::runtime_error("heun_confluent: series did not converge");
  }
  if (q == q0) return start.y;
  return heun_integrate(p, q0, start, {q}).back().y;
}

// Left solution sampled on increasing q-points in (0, 1).
inline std::vector<HeunValue> heun_left_solution(const HeunParams& p, const std::vector<double>& qs) {
  double q0 = 0.1;
  HeunValue start = heun_series(p, q0);
  if (!start.converged) {
    q0 = 0.02;
    start = heun_series(p, q0);
    if (!start.converged) throw std::runtime_error("heun series did not converge");
  }
  std::vector<HeunValue> out;
  std::vector<double> fwd;
  for (double q : qs) {
    if (q <= q0) {
      out.push_back(heun_series(p, q));
    } else {
      fwd.push_back(q);
    }
  }
  if (!fwd.empty()) {
    auto more = heun_integrate(p, q0, start, fwd);
    out.insert(out.end(), more.begin(), more.end());
  }
  return out;
}

struct BoundaryFunctional {
  double value = 0;      // extrapolated regular component at q = 1
  double spread = 0;     // |difference between the last two extrapolants|
  int interior_zeros = 0;  // sign changes of the solution on (0, 1 - delta_min]
  double last_sample = 0;
};

// Proxy for the solution value at q -> 1: samples at q = 1 - delta and
// Richardson-extrapolates to delta = 0 (polynomial in delta).
inline BoundaryFunctional heun_boundary_functional(const HeunParams& p,
                                                   std::vector<double> deltas = {1e-4, 1e-5, 1e-6},
                                                   int count_samples = 400) {
  std::sort(deltas.begin(), deltas.end(), std::greater<>());
  std::vector<double> qs;
  for (int i = 1; i <= count_samples; ++i) {
    double q = double(i) / (count_samples + 1);
    if (q < 1.0 - deltas.front()) qs.push_back(q);
  }
  for (double d : deltas) qs.push_back(1.0 - d);
  auto vals = heun_left_solution(p, qs);
  BoundaryFunctional bf;
  double prev = 1.0;
  for (const auto& v : vals) {
    if (v.y == 0.0) continue;
    if ((v.y > 0) != (prev > 0)) ++bf.interior_zeros;
    prev = v.y;
  }
  bf.last_sample = vals.back().y;
  // Neville extrapolation to delta = 0.
  size_t n = deltas.size();
  std::vector<double> T(n);
  for (size_t i = 0; i < n; ++i) T[i] = vals[vals.size() - n + i].y;
  std::vector<double> prevT = T;
  for (size_t lev = 1; lev < n; ++lev) {
    for (size_t i = n - 1; i >= lev; --i) {
      double di = deltas[i], dj = deltas[i - lev];
      T[i] = (dj * T[i] - di * T[i - 1]) / (dj - di);
      if (i == lev) break;
    }
  }
  bf.value = T[n - 1];
  bf.spread = std::abs(T[n - 1] - (n >= 2 ? T[n - 2] : T[n - 1]));
  (void)prevT;
  return bf;
}

// ---------------------------------------------------------------------------
// Angular spheroidal functions for real order m in the normalized
// Gegenbauer basis (1-s^2)^{m/2} C_r^{(m+1/2)}(s), l = m + r.

enum class SpheroidalKind { prolate, oblate };

struct SpheroidalIndex {
  double m = 0;  // order (real, >= 0)
  int n = 0;     // l - m
  double c2 = 0;  // c^2 (for the DWT family c^2 = b_s)
  SpheroidalKind kind = SpheroidalKind::prolate;
};

namespace detail {
inline double gegen_a(double m, double l) {
  return std::sqrt((l + 1.0 - m) * (l + 1.0 + m) / ((2.0 * l + 1.0) * (2.0 * l + 3.0)));
}

inline SymTridiag spheroidal_block(const SpheroidalIndex& idx, int parity, int size) {
  SymTridiag T;
  T.d.resize(size);
  T.e.resize(std::max(size - 1, 0));
  double sg = idx.kind == SpheroidalKind::prolate ? 1.0 : -1.0;
  for (int i = 0; i < size; ++i) {
    double l = idx.m + parity + 2.0 * i;
    double al = gegen_a(idx.m, l);
    double alm = (l - 1.0 >= idx.m - 1e-12 && l - idx.m >= 1.0) ? gegen_a(idx.m, l - 1.0) : 0.0;
    T.d[i] = l * (l + 1.0) + sg * idx.c2 * (al * al + alm * alm);
    if (i + 1 < size) T.e[i] = sg * idx.c2 * al * gegen_a(idx.m, l + 1.0);
  }
  return T;
}
}  // namespace detail

struct SpheroidalSolution {
  double lambda = 0;
  std::vector<double> coeffs;  // in the parity block basis
  int parity = 0;
  int truncation = 0;
};

inline SpheroidalSolution spheroidal_solve(const SpheroidalIndex& idx, double tol = 1e-10, int cap = 20000) {
  if (idx.m < 0 || idx.n < 0 || idx.c2 < 0) throw std::invalid_argument("spheroidal: invalid index");
  int parity = idx.n % 2;
  int k = idx.n / 2;
  int size = std::max(k + 16, int(std::sqrt(idx.c2)) + 24);
  double prev = std::numeric_limits<double>::quiet_NaN();
  while (true) {
    auto T = detail::spheroidal_block(idx, parity, size);
    auto ev = tridiag_lowest(T, k + 1);
    double lam = ev[k];
    if (std::abs(lam - prev) < tol * std::max(1.0, std::abs(lam))) {
      auto vec = tridiag_vectors(T, ev);
      SpheroidalSolution s;
      s.lambda = lam;
      s.coeffs = vec[k];
      s.parity = parity;
      s.truncation = size;
      // Sign: positive as s -> 1-, measured on the polynomial part.
      double a = 0.0, phi_prev = 0.0, phi = 1.0, ssum = 0.0;
      for (int r = 0; r < parity + 2 * size; ++r) {
        double l = idx.m + r;
        if (r % 2 == parity) ssum += s.coeffs[(r - parity) / 2] * phi;
        double al = detail::gegen_a(idx.m, l);
        double next = (phi - a * phi_prev) / al;
        phi_prev = phi;
        phi = next;
        a = al;
      }
      if (ssum < 0)
        for (auto& v : s.coeffs) v = -v;
      return s;
    }
    prev = lam;
    if (size >= cap) throw std::runtime_error("spheroidal: truncation cap reached");
    size *= 2;
  }
}

inline double spheroidal_eigenvalue(const SpheroidalIndex& idx) { return spheroidal_solve(idx).lambda; }

inline double spheroidal_eval(const SpheroidalIndex& idx, const SpheroidalSolution& sol, double s) {
  const double m = idx.m;
  double log_n0 = 0.5 * (0.5 * std::log(M_PI) + log_gamma(m + 1.0) - log_gamma(m + 1.5));
  double w = 1.0 - s * s;
  if (w <= 0.0) return 0.0;
  double pref = std::exp(0.5 * m * std::log(w) - log_n0);
  double a = 0.0, phi_prev = 0.0, phi = 1.0, sum = 0.0;
  int nterms = sol.parity + 2 * int(sol.coeffs.size());
  for (int r = 0; r < nterms; ++r) {
    double l = m + r;
    if (r % 2 == sol.parity) sum += sol.coeffs[(r - sol.parity) / 2] * phi;
    double al = detail::gegen_a(m, l);
    double next = (s * phi - a * phi_prev) / al;
    phi_prev = phi;
    phi = next;
    a = al;
  }
  return pref * sum;
}

inline double spheroidal_function(const SpheroidalIndex& idx, double s) {
  if (std::abs(s) > 1.0) throw std::domain_error("spheroidal_function: |s| > 1");
  return spheroidal_eval(idx, spheroidal_solve(idx), s);
}

}  // namespace deformed_spectra
