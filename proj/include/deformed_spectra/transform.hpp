#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "algebra.hpp"
#include "quadrature.hpp"
#include "spectral.hpp"

namespace deformed_spectra {

// Gamma = exp(log Gamma).  dlog carries the jet of (log Gamma)', which is
// all the conjugation needs; log_value is the principal-branch value.
struct SimilarityWeight {
  CoefficientFunction dlog;
  std::function<cplx(cplx)> log_value;
  cplx operator()(cplx x) const { return std::exp(log_value(x)); }
};

// -1/2 d/dx (1/m) d/dx + V with complex coefficient functions.
struct PdmSystem {
  CoefficientFunction mass;
  CoefficientFunction potential;
  double x_min = -std::numeric_limits<double>::infinity();
  double x_max = std::numeric_limits<double>::infinity();
};

inline Operator mult(const CoefficientFunction& f) { return Operator::multiplication(f); }

// H = mu-(x) J- + mu0(x) J0 + mu+(x) in the PT realization.
inline Operator generic_hamiltonian(const CoefficientFunction& mu_m, const CoefficientFunction& mu_0,
                                    const CoefficientFunction& mu_p, double z, double lambda) {
  Triple t = make_pt_realization(z, lambda);
  return compose(mult(mu_m), t.minus) + compose(mult(mu_0), t.zero) + mult(mu_p);
}

inline SimilarityWeight gamma_generic(const CoefficientFunction& mu_m, const CoefficientFunction& mu_0, double z,
                                      double lambda, cplx C = 1.0) {
  SimilarityWeight g;
  g.dlog = CoefficientFunction([=](cplx x) {
    Jet X = Jet::variable(x);
    Jet m = mu_m.jet(x);
    if (std::abs(m.value()) < 1e-300) throw std::domain_error("gamma_generic: mu- vanishes");
    Jet integrand = (m.differentiate() - 2.0 * I * mu_0.jet(x)) / (2.0 * m);
    return cot(X * z) * (-(lambda + 1.0) * z / 2.0) - integrand + Jet(0.5 * I * z, X.valid());
  });
  g.log_value = [=](cplx x) {
    if (x.imag() != 0.0) throw std::domain_error("gamma_generic: quadrature runs along the real axis");
    auto f = [&](double t) {
      Jet m = mu_m.jet(t);
      if (std::abs(m.value()) < 1e-300) throw std::domain_error("gamma_generic: mu- vanishes");
      return ((m.deriv(1) - 2.0 * I * mu_0.eval(t)) / (2.0 * m.value()));
    };
    cplx integral = integrate_complex(f, 1.0, x.real(), 1e-12);
    cplx ratio = std::sin(x * z) / std::sin(z);
    return std::log(C) - (lambda + 1.0) / 2.0 * std::log(ratio) - integral + 0.5 * I * (x - 1.0) * z;
  };
  return g;
}

// For H = a D^2 + b D + c, the weight with g' = (b - a')/(2a) makes
// Gamma H Gamma^{-1} self-adjoint in the PDM sense.  log_value integrates
// g' along the real axis from x_ref.
inline SimilarityWeight derived_similarity_weight(const Operator& H, double x_ref = 0.5) {
  if (H.order() != 2) throw std::invalid_argument("derived weight needs a second-order operator");
  SimilarityWeight g;
  g.dlog = CoefficientFunction([H](cplx x) {
    Jet a = H.coefficient(2).jet(x);
    Jet b = H.has(1) ? H.coefficient(1).jet(x) : Jet(0.0, a.valid());
    return (b - a.differentiate()) / (2.0 * a);
  });
  auto d = g.dlog;
  g.log_value = [d, x_ref](cplx x) {
    return integrate_complex([&](double t) { return d.eval(t); }, x_ref, x.real(), 1e-12);
  };
  return g;
}

// PDM data implied by the derived weight: 1/m = -2a,
// V = a (g'^2 - g'') - b g' + c.
inline PdmSystem pdm_from_operator(const Operator& H) {
  auto w = derived_similarity_weight(H);
  PdmSystem p;
  p.mass = CoefficientFunction([H](cplx x) { return -0.5 / H.coefficient(2).jet(x); });
  auto d = w.dlog;
  p.potential = CoefficientFunction([H, d](cplx x) {
    Jet a = H.coefficient(2).jet(x);
    Jet b = H.has(1) ? H.coefficient(1).jet(x) : Jet(0.0, a.valid());
    Jet c = H.has(0) ? H.coefficient(0).jet(x) : Jet(0.0, a.valid());
    Jet g1 = d.jet(x);
    return a * (g1 * g1 - g1.differentiate()) - b * g1 + c;
  });
  return p;
}

// Closed-form mass and potential for the generic Hamiltonian.
inline PdmSystem pdm_from_generic(const CoefficientFunction& mu_m, const CoefficientFunction& mu_0,
                                  const CoefficientFunction& mu_p, double z, double lambda) {
  PdmSystem p;
  p.mass = CoefficientFunction([=](cplx x) {
    Jet X = Jet::variable(x);
    Jet s = sin(X * z);
    if (std::abs(s.value()) < 1e-300) throw std::domain_error("pdm_from_generic: cosecant pole");
    return exp(X * (I * z)) * (-I * z) / (2.0 * s * mu_m.jet(x));
  });
  p.potential = CoefficientFunction([=](cplx x) {
    Jet X = Jet::variable(x);
    Jet m = mu_m.jet(x), m1 = m.differentiate(), m2 = m1.differentiate();
    Jet u0 = mu_0.jet(x), u01 = u0.differentiate();
    Jet s = sin(X * z), e2 = exp(X * (2.0 * I * z)) - 1.0;
    Jet q = 2.0 * u0 + I * m1;
    Jet V = mu_p.jet(x);
    V += s * s * q * q / (2.0 * z * m * e2);
    V -= ((lambda * (lambda + 2.0) + 2.0) * z * z * m + (cos(X * (2.0 * z)) - 1.0) * (m2 - 2.0 * I * u01)) /
         (2.0 * z * e2);
    V += exp(X * (-I * z)) * m1 * s / e2;
    V += z * m * exp(X * (-2.0 * I * z)) / (2.0 * e2);
    return V;
  });
  return p;
}

// (Gamma H Gamma^{-1} - h) f at x.
inline cplx similarity_conjugate_residual(const Operator& H, const SimilarityWeight& G, const PdmSystem& h,
                                          const TestFunction& f, cplx x) {
  Jet g = G.dlog.jet(x).integrate();
  Jet F = f.jet(x);
  Jet conj = exp(g) * apply_jet(H, exp(-g) * F, x);
  Jet invm = 1.0 / h.mass.jet(x);
  cplx hf = -0.5 * invm.deriv(1) * F.deriv(1) - 0.5 * invm.value() * F.deriv(2) + h.potential.eval(x) * F.value();
  return conj.value() - hf;
}

// ---------------------------------------------------------------------------
// Point canonical transformation on the contour x = i xi, xi real.

// Real-variable data of a PDM problem along the contour.
struct ContourPdm {
  std::function<Jet(double)> M;  // mass profile m_xi / m0 as a jet in xi
  std::function<double(double)> V;
  double m0 = 1.0;
};

// With x = i xi, -1/2 d/dx (1/m) d/dx = -1/2 d/dxi (1/m_xi) d/dxi and m_xi = -m(i xi).
inline ContourPdm to_contour(const PdmSystem& p, double m0, double imag_tol = 1e-8) {
  ContourPdm c;
  c.m0 = m0;
  auto mass = p.mass;
  auto pot = p.potential;
  c.M = [mass, m0](double xi) { return mass.jet(I * xi).scale_variable(I) * (-1.0 / m0); };
  c.V = [pot, imag_tol](double xi) {
    cplx v = pot.eval(I * xi);
    if (std::abs(v.imag()) > imag_tol * std::max(1.0, std::abs(v.real())))
      throw std::domain_error("contour potential is not real");
    return v.real();
  };
  return c;
}

struct CoordinateMap {
  std::function<double(double)> w;         // xi -> u
  std::function<double(double)> F;         // u -> xi
  std::function<double(double)> jacobian;  // dF/du
  double xi_min = 0, xi_max = 0;
  double u_min = 0, u_max = 0;
};

inline double jet_real(const Jet& j, int k) {
  return j.deriv(k).real();
}

// |int_{xi_ref}^{edge} sqrt(M)|, or infinity when the integral diverges.
template <class G>
double edge_integral(G sqrtM, double xi_ref, double edge) {
  double err = 0.0, l1 = 0.0, v = 0.0;
  const double sign = edge > xi_ref ? 1.0 : -1.0;
  try {
    if (std::isfinite(edge)) {
      static thread_local boost::math::quadrature::tanh_sinh<double> ts(15);
      double a = std::sqrt(std::abs(edge - xi_ref));
      auto g = [&](double t) {
        double x = edge - sign * t * t;
        // Within rounding of the edge the profile may evaluate to inf; the
        // quadrature weight is negligible there.
        if (std::abs(x - edge) < 1e-150) return 0.0;
        double r = 2.0 * t * sqrtM(x);
        return std::isfinite(r) ? r : 0.0;
      };
      v = ts.integrate(g, 0.0, a, 1e-12, &err, &l1);
    } else {
      boost::math::quadrature::exp_sinh<double> es(12);
      auto g = [&](double t) {
        double m = 0.0;
        try {
          m = sqrtM(xi_ref + sign * t);
        } catch (const std::domain_error&) {
          m = 0.0;  // underflow far out
        }
        return m;
      };
      v = es.integrate(g, 1e-12, &err, &l1);
    }
  } catch (const std::exception&) {
    return std::numeric_limits<double>::infinity();
  }
  if (!std::isfinite(v) || err > 1e-6 * std::abs(v) || v > 1e12) return std::numeric_limits<double>::infinity();
  return v;
}

// u = w(xi) = u_ref + int_{xi_ref}^{xi} sqrt(M); inverse by bracketed
// bisection refined with Newton steps.
inline CoordinateMap pct_forward(std::function<Jet(double)> M, double xi_min, double xi_max, double xi_ref,
                                 double u_ref, double tol = 1e-14) {
  auto sqrtM = [M](double xi) {
    double m = M(xi).value().real();
    if (!(m > 0)) throw std::domain_error("pct_forward: mass profile not positive");
    return std::sqrt(m);
  };
  {
    // Positivity probe on 64 points strictly inside the domain.
    double lo = std::isfinite(xi_min) ? xi_min : xi_ref - 50.0;
    double hi = std::isfinite(xi_max) ? xi_max : xi_ref + 50.0;
    for (int i = 1; i <= 64; ++i) (void)sqrtM(lo + (hi - lo) * i / 65.0);
  }
  CoordinateMap map;
  map.xi_min = xi_min;
  map.xi_max = xi_max;
  // Mass profiles typically blow up like (xi - edge)^{-1} at a finite edge;
  // xi = edge +- t^2 keeps the integrand smooth there.
  map.w = [sqrtM, xi_ref, u_ref, xi_min, xi_max](double xi) {
    if (xi < xi_ref && std::isfinite(xi_min)) {
      auto g = [&](double t) { return 2.0 * t * sqrtM(xi_min + t * t); };
      return u_ref - integrate(g, std::sqrt(xi - xi_min), std::sqrt(xi_ref - xi_min), 1e-13);
    }
    if (xi > xi_ref && std::isfinite(xi_max)) {
      auto g = [&](double t) { return 2.0 * t * sqrtM(xi_max - t * t); };
      return u_ref + integrate(g, std::sqrt(xi_max - xi), std::sqrt(xi_max - xi_ref), 1e-13);
    }
    return u_ref + integrate(sqrtM, xi_ref, xi, 1e-13);
  };
  auto w = map.w;
  // Solved in s with xi = edge -+ s^2 on a side with a finite edge, so the
  // distance to the edge (which the potential depends on) keeps full
  // relative precision; xi = s on an infinite side.
  map.F = [w, sqrtM, xi_min, xi_max, xi_ref, tol](double u) {
    const bool upper = u >= w(xi_ref);
    const double edge = upper ? xi_max : xi_min;
    const bool finite = std::isfinite(edge);
    const double dir = upper ? 1.0 : -1.0;
    auto xi_of = [&](double s) { return finite ? edge - dir * s * s : s; };
    // g(s) = w(xi(s)) - u, increasing in s on an infinite side, decreasing
    // towards the edge on a finite one.
    double s_ref = finite ? std::sqrt(std::abs(edge - xi_ref)) : xi_ref;
    double lo = s_ref, hi = s_ref;
    if (finite) {
      lo = s_ref;
      while (dir * (w(xi_of(lo)) - u) < 0) {
        hi = lo;
        lo *= 0.5;
        if (lo < 1e-150) throw std::runtime_error("pct inversion bracket failure");
      }
    } else {
      double step = 1.0;
      while (dir * (w(xi_of(dir > 0 ? hi : lo)) - u) < 0) {
        if (dir > 0) {
          lo = hi;
          hi += step;
        } else {
          hi = lo;
          lo -= step;
        }
        step *= 2.0;
        if (step > 1e12) throw std::runtime_error("pct inversion bracket failure");
      }
    }
    if (lo == hi) return xi_of(lo);
    // Sign of g at lo decides which side of the root each endpoint sits.
    const double glo_sign = (w(xi_of(lo)) - u) > 0 ? 1.0 : -1.0;
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      double xi = xi_of(x);
      double r = w(xi) - u;
      if (r == 0.0) return xi;
      if ((r > 0) == (glo_sign > 0))
        lo = x;
      else
        hi = x;
      double dxi_ds = finite ? -dir * 2.0 * x : 1.0;
      double xn = x - r / (sqrtM(xi) * dxi_ds);
      if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
      if (std::abs(xn - x) <= tol * std::abs(x) + 1e-300) return xi_of(xn);
      x = xn;
    }
    return xi_of(x);
  };
  map.jacobian = [sqrtM, F = map.F](double u) { return 1.0 / sqrtM(F(u)); };
  map.u_min = u_ref - edge_integral(sqrtM, xi_ref, xi_min);
  map.u_max = u_ref + edge_integral(sqrtM, xi_ref, xi_max);
  return map;
}

// W^2 + W' in terms of the mass profile: (7/16) M'^2/M^3 - (1/4) M''/M^2.
inline double pct_quantum_term(const Jet& M) {
  double m = M.value().real(), m1 = jet_real(M, 1), m2 = jet_real(M, 2);
  return 7.0 / 16.0 * m1 * m1 / (m * m * m) - 0.25 * m2 / (m * m);
}

// W(u) = d/du ln M^{-1/4} = -M'/(4 M^{3/2}).
inline double pct_W(const Jet& M) {
  double m = M.value().real();
  return -0.25 * jet_real(M, 1) / (m * std::sqrt(m));
}

inline ConstantMassProblem pct_potential(const ContourPdm& c, const CoordinateMap& map) {
  ConstantMassProblem p;
  p.m0 = c.m0;
  auto M = c.M;
  auto V = c.V;
  auto F = map.F;
  double m0 = c.m0;
  p.U = [M, V, F, m0](double u) {
    double xi = F(u);
    return V(xi) + pct_quantum_term(M(xi)) / (2.0 * m0);
  };
  p.y_min = map.u_min;
  p.y_max = map.u_max;
  return p;
}

struct PulledBack {
  std::vector<double> xi;   // contour parameter, x = i xi
  std::vector<double> phi;
};

// phi(F(u)) = psi(u) exp(-int^u W), cumulative trapezoid on the u samples.
inline PulledBack pullback_wavefunction(const std::vector<double>& u, const std::vector<double>& psi,
                                        const std::function<double(double)>& W, const CoordinateMap& map) {
  if (u.size() != psi.size()) throw std::invalid_argument("pullback: size mismatch");
  PulledBack r;
  double acc = 0.0;
  double wprev = u.empty() ? 0.0 : W(u[0]);
  for (size_t i = 0; i < u.size(); ++i) {
    double wi = W(u[i]);
    if (i > 0) acc += 0.5 * (wprev + wi) * (u[i] - u[i - 1]);
    wprev = wi;
    r.xi.push_back(map.F(u[i]));
    r.phi.push_back(psi[i] * std::exp(-acc));
  }
  return r;
}

}  // namespace deformed_spectra
