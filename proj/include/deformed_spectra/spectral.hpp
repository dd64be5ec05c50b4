#pragma once

#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "tridiag.hpp"

namespace deformed_spectra {

// -1/(2 m0) psi'' + U psi = E psi on (y_min, y_max), psi = 0 at both ends.
struct ConstantMassProblem {
  double m0 = 1.0;
  std::function<double(double)> U;
  double y_min = 0.0, y_max = 1.0;
  std::string label;
  // Optional: U as a function of the distance to y_min / y_max.  Near a wall
  // the coordinate y keeps only ~1e-16/d of the distance d, which matters
  // for singular walls; shooting uses these when present.
  std::function<double(double)> U_near_min, U_near_max;

  // Same physics in the variable y' = s y.
  ConstantMassProblem rescaled(double s) const {
    ConstantMassProblem p = *this;
    auto u = U;
    p.U = [u, s](double yp) { return u(yp / s); };
    if (U_near_min) p.U_near_min = [f = U_near_min, s](double d) { return f(d / s); };
    if (U_near_max) p.U_near_max = [f = U_near_max, s](double d) { return f(d / s); };
    p.y_min = y_min * s;
    p.y_max = y_max * s;
    p.m0 = m0 / (s * s);
    return p;
  }
};

// Interior nodes y_i = y_min + i h, i = 1..n_points, h = L/(n_points+1).
// The Dirichlet condition sits exactly at the interval ends, so the
// potential is never sampled on a wall.
struct Grid {
  int n_points = 256;
  double y_min = 0.0, y_max = 1.0;
  double h() const { return (y_max - y_min) / (n_points + 1); }
  double y(int i) const { return y_min + (i + 1) * h(); }
  std::vector<double> values() const {
    std::vector<double> v(n_points);
    for (int i = 0; i < n_points; ++i) v[i] = y(i);
    return v;
  }
};

struct SpectrumEntry {
  int n = 0;
  double E = 0.0;
  std::vector<double> psi;
  double norm_residual = 0.0;
  double error_estimate = 0.0;
};

struct Spectrum {
  Grid grid;
  std::vector<SpectrumEntry> entries;
  bool converged = true;
  std::string method = "fd";
  std::vector<double> energies() const {
    std::vector<double> e;
    for (const auto& x : entries) e.push_back(x.E);
    return e;
  }
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Simpson when the node count including the zero end values is odd,
// trapezoid otherwise.
inline double overlap(const std::vector<double>& a, const std::vector<double>& b, const Grid& g,
                      bool simpson = true) {
  if (a.size() != b.size() || int(a.size()) != g.n_points) throw std::invalid_argument("overlap: grid mismatch");
  const size_t n = a.size();
  const double h = g.h();
  bool use_simpson = simpson && (n + 2) % 2 == 1;
  double s = 0.0;
  if (use_simpson) {
    for (size_t i = 0; i < n; ++i) s += (i % 2 == 0 ? 4.0 : 2.0) * a[i] * b[i];
    return s * h / 3.0;
  }
  for (size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s * h;
}

inline int sign_changes(const std::vector<double>& v) {
  double big = 0.0;
  for (double x : v) big = std::max(big, std::abs(x));
  int count = 0;
  double prev = 0.0;
  for (double x : v) {
    if (std::abs(x) <= 1e-10 * big) continue;
    if (prev != 0.0 && (x > 0) != (prev > 0)) ++count;
    prev = x;
  }
  return count;
}

inline void fix_sign(std::vector<double>& psi) {
  double big = 0.0;
  for (double x : psi) big = std::max(big, std::abs(x));
  for (double x : psi) {
    if (std::abs(x) > 1e-6 * big) {
      if (x < 0)
        for (auto& v : psi) v = -v;
      return;
    }
  }
}

inline SymTridiag fd_matrix(const ConstantMassProblem& prob, const Grid& g) {
  SymTridiag T;
  const int n = g.n_points;
  const double h = g.h();
  const double k = 1.0 / (2.0 * prob.m0 * h * h);
  T.d.resize(n);
  T.e.assign(n - 1, -k);
  for (int i = 0; i < n; ++i) {
    double u = prob.U(g.y(i));
    if (!std::isfinite(u)) throw SolverError("potential not finite on grid at y = " + std::to_string(g.y(i)));
    T.d[i] = 2.0 * k + u;
  }
  return T;
}

inline Spectrum solve_dirichlet(const ConstantMassProblem& prob, const Grid& grid, int n_states,
                                bool with_vectors = true) {
  if (grid.n_points < 16) throw std::invalid_argument("grid too coarse");
  if (n_states <= 0 || n_states * 4 > grid.n_points) throw SolverError("requested states exceed resolvable count");
  auto T = fd_matrix(prob, grid);
  auto ev = tridiag_lowest(T, n_states);
  Spectrum sp;
  sp.grid = grid;
  std::vector<std::vector<double>> vecs;
  if (with_vectors) vecs = tridiag_vectors(T, ev);
  for (int k = 0; k < n_states; ++k) {
    SpectrumEntry e;
    e.n = k;
    e.E = ev[k];
    if (with_vectors) {
      e.psi = vecs[k];
      double nrm = std::sqrt(overlap(e.psi, e.psi, grid, false));
      for (auto& v : e.psi) v /= nrm;
      fix_sign(e.psi);
      e.norm_residual = std::abs(overlap(e.psi, e.psi, grid, false) - 1.0);
    }
    sp.entries.push_back(std::move(e));
  }
  return sp;
}

struct RefineOptions {
  int n_start = 256;
  int n_cap = 1 << 20;
  bool with_vectors = true;
};

// Grid doubling with Richardson extrapolation (4 E(h/2) - E(h)) / 3; stops
// when successive extrapolants move by less than tol (relative to max(1,|E|)).
inline Spectrum refine(const ConstantMassProblem& prob, int n_states, double tol, RefineOptions opt = {}) {
  if (!(tol > 0)) throw std::invalid_argument("tol must be positive");
  Grid g{opt.n_start, prob.y_min, prob.y_max};
  std::vector<double> e_prev = solve_dirichlet(prob, g, n_states, false).energies();
  std::vector<double> r_prev;
  while (true) {
    int next = 2 * (g.n_points + 1) - 1;
    if (next > opt.n_cap) {
      Spectrum sp = solve_dirichlet(prob, g, n_states, opt.with_vectors);
      sp.converged = false;
      throw SolverError("refine: grid cap reached before tolerance");
    }
    g.n_points = next;
    auto e = solve_dirichlet(prob, g, n_states, false).energies();
    std::vector<double> r(n_states);
    for (int k = 0; k < n_states; ++k) r[k] = (4.0 * e[k] - e_prev[k]) / 3.0;
    bool done = false;
    double worst = 0.0;
    if (!r_prev.empty()) {
      done = true;
      for (int k = 0; k < n_states; ++k) {
        double d = std::abs(r[k] - r_prev[k]) / std::max(1.0, std::abs(r[k]));
        worst = std::max(worst, d);
        if (d >= tol) done = false;
      }
    }
    if (done || tol >= 1.0) {
      Spectrum sp = solve_dirichlet(prob, g, n_states, opt.with_vectors);
      for (int k = 0; k < n_states; ++k) {
        sp.entries[k].E = r[k];
        sp.entries[k].error_estimate = r_prev.empty() ? std::abs(r[k] - e[k]) : std::abs(r[k] - r_prev[k]);
      }
      return sp;
    }
    e_prev = e;
    r_prev = r;
  }
}

// ---------------------------------------------------------------------------
// Shooting from both walls with a power-law start psi ~ (y - a)^s, where s
// solves s(s-1) = g and g = 2 m0 U(a + eps) eps^2 is the wall strength.

struct ShootingOptions {
  double start_offset = 1e-7;  // relative to the interval length
  int segments = 1500;         // per half interval, for node counting
  double rel_tol = 1e-12;
};

namespace detail {
using st2 = std::array<double, 2>;

// Potential at distance d from the wall the shot starts at.
inline std::function<double(double)> wall_potential(const ConstantMassProblem& p, double wall, double inward) {
  if (inward > 0 && p.U_near_min && wall == p.y_min) return p.U_near_min;
  if (inward < 0 && p.U_near_max && wall == p.y_max) return p.U_near_max;
  return [&p, wall, inward](double d) { return p.U(wall + inward * d); };
}

inline double wall_exponent(const std::function<double(double)>& Ud, double m0, double L) {
  // g(eps) = g + O(eps^2) for a 1/d^2 wall; one Richardson step removes the
  // correction.  At a critical wall (g = -1/4) the square root turns any
  // residual into a visible exponent error that mixes in the d^{1/2} ln d
  // solution, so near-critical values are snapped.
  double eps = 1e-5 * L;
  auto gat = [&](double e) { return 2.0 * m0 * Ud(e) * e * e; };
  double g = (4.0 * gat(eps) - gat(2.0 * eps)) / 3.0;
  if (g + 0.25 < 1e-8) return 0.5;
  return 0.5 + std::sqrt(0.25 + g);
}

inline double wall_exponent(const ConstantMassProblem& p, double wall, double inward, double L) {
  return wall_exponent(wall_potential(p, wall, inward), p.m0, L);
}

struct HalfShot {
  st2 state;  // (psi, psi') at the end point, unit-normalized
  int zeros = 0;
};

// Integrates in the distance d from the starting wall; the returned state
// is (psi, dpsi/dy) at the end point.
inline HalfShot shoot(const ConstantMassProblem& p, double E, double from, double to, double inward,
                      const ShootingOptions& opt) {
  using namespace boost::numeric::odeint;
  const double L = p.y_max - p.y_min;
  auto Ud = wall_potential(p, from, inward);
  double s = wall_exponent(Ud, p.m0, L);
  double eps = opt.start_offset * L;
  st2 y{1.0, s / eps};
  double n0 = std::hypot(y[0], y[1]);
  y[0] /= n0;
  y[1] /= n0;
  auto rhs = [&](const st2& x, st2& dx, double d) {
    dx[0] = x[1];
    dx[1] = 2.0 * p.m0 * (Ud(d) - E) * x[0];
  };
  auto stepper = make_controlled(1e-300, opt.rel_tol, runge_kutta_dopri5<st2>());
  // Geometric checkpoints near the wall, then uniform ones.
  const double span = std::abs(to - from);
  std::vector<double> pts;
  double g = 2.0 * eps;
  while (g < span / opt.segments) {
    pts.push_back(g);
    g *= 2.0;
  }
  double base = pts.empty() ? eps : pts.back();
  for (int i = 1; i <= opt.segments; ++i) pts.push_back(base + (span - base) * i / opt.segments);
  HalfShot hs;
  double d = eps;
  double prev = y[0];
  for (double next : pts) {
    if (next <= d) continue;
    integrate_adaptive(stepper, rhs, y, d, next, std::min(eps, next - d));
    d = next;
    if ((y[0] > 0) != (prev > 0) && y[0] != 0.0) ++hs.zeros;
    if (y[0] != 0.0) prev = y[0];
    double nrm = std::hypot(y[0], y[1]);
    if (!std::isfinite(nrm)) throw SolverError("shooting integration overflow");
    y[0] /= nrm;
    y[1] /= nrm;
  }
  hs.state = {y[0], inward * y[1]};
  return hs;
}
}  // namespace detail

struct ShootingResult {
  double mismatch = 0;  // normalized Wronskian at the midpoint
  int nodes = 0;        // interior sign changes of the matched pieces
  int count = 0;        // eigenvalues below E
};

namespace detail {
// atan2(psi, psi') reduced to (0, pi].
inline double prufer_residue(const st2& y) {
  double a = std::atan2(y[0], y[1]);
  return a <= 0.0 ? a + M_PI : a;
}
}  // namespace detail

// Both walls shot to the midpoint.  Pruefer angles phi_L = k_L pi + a_L
// (zero at the left wall) and phi_R = a_R - k_R pi (pi at the right wall)
// give the eigenvalue count floor((phi_L - phi_R)/pi) + 1.  Counting zeros
// of a single full shot instead fails at critical walls (s = 1/2), where
// the crossing of the log solution sits exponentially close to the wall.
inline ShootingResult shooting_mismatch(const ConstantMassProblem& p, double E, ShootingOptions opt = {}) {
  double mid = 0.5 * (p.y_min + p.y_max);
  auto l = detail::shoot(p, E, p.y_min, mid, +1.0, opt);
  auto r = detail::shoot(p, E, p.y_max, mid, -1.0, opt);
  ShootingResult res;
  res.mismatch = l.state[0] * r.state[1] - r.state[0] * l.state[1];
  res.nodes = l.zeros + r.zeros;
  double phi_l = l.zeros * M_PI + detail::prufer_residue(l.state);
  double phi_r = detail::prufer_residue(r.state) - r.zeros * M_PI;
  res.count = int(std::floor((phi_l - phi_r) / M_PI)) + 1;
  return res;
}

inline int shooting_count(const ConstantMassProblem& p, double E, ShootingOptions opt = {}) {
  return shooting_mismatch(p, E, opt).count;
}

inline double shooting_eigenvalue(const ConstantMassProblem& p, double E_lo, double E_hi, ShootingOptions opt = {},
                                  double tol = 1e-10) {
  auto r_lo = shooting_mismatch(p, E_lo, opt), r_hi = shooting_mismatch(p, E_hi, opt);
  if (r_hi.count - r_lo.count != 1) throw SolverError("shooting: bracket must hold exactly one eigenvalue");
  double f_lo = r_lo.mismatch;
  double f_hi = r_hi.mismatch;
  if ((f_lo > 0) == (f_hi > 0)) throw SolverError("shooting: no sign change in bracket");
  double lo = E_lo, hi = E_hi;
  while (hi - lo > tol * std::max(1.0, std::abs(lo))) {
    double mid = 0.5 * (lo + hi);
    double f = shooting_mismatch(p, mid, opt).mismatch;
    if ((f > 0) == (f_lo > 0)) {
      lo = mid;
      f_lo = f;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Grid refinement first; walls where finite differences converge too slowly
// (critical 1/d^2 strength) fall back to shooting, bracketed by midpoints
// between finite-difference levels.  Vectors stay the finite-difference ones.
struct SolveOptions {
  RefineOptions refine{256, 1 << 17, true};
  int fallback_points = (1 << 14) - 1;
  ShootingOptions shooting{};
};

inline Spectrum solve_spectrum(const ConstantMassProblem& prob, int n_states, double tol, SolveOptions opt = {}) {
  try {
    return refine(prob, n_states, tol, opt.refine);
  } catch (const SolverError&) {
  }
  Grid g{opt.fallback_points, prob.y_min, prob.y_max};
  Spectrum fd = solve_dirichlet(prob, g, n_states + 1, opt.refine.with_vectors);
  auto e = fd.energies();
  Spectrum sp;
  sp.grid = g;
  sp.method = "shooting";
  for (int k = 0; k < n_states; ++k) {
    double below = k == 0 ? e[0] - 0.5 * (e[1] - e[0]) : 0.5 * (e[k - 1] + e[k]);
    double above = 0.5 * (e[k] + e[k + 1]);
    SpectrumEntry en = fd.entries[k];
    en.E = shooting_eigenvalue(prob, below, above, opt.shooting, std::min(tol, 1e-10));
    en.error_estimate = std::abs(en.E - e[k]);
    sp.entries.push_back(std::move(en));
  }
  return sp;
}

}  // namespace deformed_spectra
