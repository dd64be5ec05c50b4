#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <limits>
#include <vector>

#include "quadrature.hpp"
#include "spectral.hpp"
#include "specfun.hpp"
#include "transform.hpp"

namespace deformed_spectra {

struct ModelParams {
  double z = 1.0;
  double lambda = 2.0;
  double mu_m = 1.0, mu_0 = 0.0, mu_p = 0.0;
  double eta = 0.0;
  double g = 1.0, c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
  double m0 = 1.0;
};

struct PtParams {
  double alpha = 0, beta = 0;
  std::complex<double> tau = 0;
  double kappa = 0;
  bool bound = true;     // alpha > 1 and beta > 1
  bool tau_real = true;  // unbroken phase for Example 2
};

enum class Example { example1, example2 };

inline std::complex<double> tau_of(const ModelParams& p) {
  return std::sqrt(std::complex<double>(p.mu_0 * p.mu_0 + 2.0 * p.mu_p * p.mu_m, 0.0));
}

// Larger roots of alpha(alpha-1) = 3/4 + lambda(lambda+2) and
// beta(beta-1) = q^2 - 1/4, i.e. alpha = lambda + 3/2, beta = 1/2 + |q|.
inline PtParams alpha_beta_from(const ModelParams& p, Example which) {
  PtParams r;
  r.alpha = std::abs(p.lambda + 1.0) + 0.5;
  double q = 0.0;
  if (which == Example::example1) {
    q = p.mu_0 / (p.mu_m * p.z);
  } else {
    r.tau = tau_of(p);
    r.tau_real = r.tau.imag() == 0.0;
    if (!r.tau_real) throw std::domain_error("tau is complex: broken PT phase");
    q = r.tau.real() / (p.mu_m * p.z);
  }
  r.beta = 0.5 + std::abs(q);
  double k2 = (p.mu_0 * p.mu_0 + p.mu_p * p.mu_m) / (p.mu_m * p.mu_m);
  r.kappa = k2 >= 0 ? std::sqrt(k2) : 0.0;
  r.bound = r.alpha > 1.0 && r.beta > 1.0;
  return r;
}

// ---------------------------------------------------------------------------
// Example 1.  Energies are in the units of the original Hamiltonian; the
// y-problem is -(mu- z / 2) psi'' + U psi = E psi on (0, pi/2).

inline double example1_scaled_potential(const ModelParams& p, const PtParams& ab, double y) {
  double s = std::sin(y), c = std::cos(y);
  double v = ab.beta * (ab.beta - 1.0) / (c * c) + ab.alpha * (ab.alpha - 1.0) / (s * s) -
             p.mu_0 * p.mu_0 / (p.mu_m * p.mu_m * p.z * p.z);
  if (p.mu_p != 0.0) v += p.mu_p / (p.mu_m * p.z * p.z) * std::log(1.0 / (c * c));
  return v;
}

inline ConstantMassProblem example1_potential(const ModelParams& p) {
  auto ab = alpha_beta_from(p, Example::example1);
  ConstantMassProblem prob;
  prob.m0 = 1.0 / (p.mu_m * p.z);
  prob.U = [p, ab](double y) { return 0.5 * p.mu_m * p.z * example1_scaled_potential(p, ab, y); };
  prob.U_near_max = [p, ab](double d) {
    // sin/cos swap roles at distance d from pi/2.
    double s = std::cos(d), c = std::sin(d);
    double v = ab.beta * (ab.beta - 1.0) / (c * c) + ab.alpha * (ab.alpha - 1.0) / (s * s) -
               p.mu_0 * p.mu_0 / (p.mu_m * p.mu_m * p.z * p.z);
    if (p.mu_p != 0.0) v -= p.mu_p / (p.mu_m * p.z * p.z) * 2.0 * std::log(c);
    return 0.5 * p.mu_m * p.z * v;
  };
  prob.y_min = 0.0;
  prob.y_max = M_PI / 2.0;
  prob.label = "example1";
  return prob;
}

inline double example1_spectrum_exact(const ModelParams& p, int n) {
  if (p.mu_p != 0.0) throw std::invalid_argument("example1_spectrum_exact requires mu+ = 0");
  auto ab = alpha_beta_from(p, Example::example1);
  double k = 2.0 * n + ab.alpha + ab.beta;
  return 0.5 * p.mu_m * p.z * k * k - p.mu_0 * p.mu_0 / (2.0 * p.mu_m * p.z);
}

// (1/2) mu- z (2n+lambda+2)^2 + mu0 (2n+lambda+2); equals the exact value
// only for mu0 >= 0.
inline double example1_spectrum_lambda_form(const ModelParams& p, int n) {
  double k = 2.0 * n + p.lambda + 2.0;
  return 0.5 * p.mu_m * p.z * k * k + p.mu_0 * k;
}

inline double pt_eigenfunction(int n, double alpha, double beta, double y) {
  double s = std::sin(y), c = std::cos(y);
  if (s <= 0.0 || c <= 0.0) return 0.0;
  // 2F1(-n, n+alpha+beta; beta+1/2; cos^2) through the Jacobi recurrence;
  // the plain series cancels badly beyond n ~ 15.
  double ratio = std::exp(log_gamma(n + 1.0) + log_gamma(beta + 0.5) - log_gamma(n + beta + 0.5));
  return pt_normalization(n, alpha, beta) * std::pow(s, alpha) * std::pow(c, beta) * ratio *
         jacobi_polynomial(n, beta - 0.5, alpha - 0.5, -std::cos(2.0 * y));
}

inline double example1_eigenfunction(const ModelParams& p, int n, double y) {
  auto ab = alpha_beta_from(p, Example::example1);
  return pt_eigenfunction(n, ab.alpha, ab.beta, y);
}

// <Psi_n | sin^{2k} | Psi_n> / k summed over k.  The inner sums use
// int_0^{pi/2} sin^{2a-1} cos^{2b-1} = B(a,b)/2 with the terminating 2F1
// expanded in powers of cos^2.
struct SeriesResult {
  double value = 0;
  double error_estimate = 0;
  long terms = 0;
  bool converged = true;
};

namespace detail {
inline std::vector<double> pt_moments(int n, double alpha, double beta) {
  // Coefficients of cos^{2m} in the 2F1 and their self-convolution.
  std::vector<double> c(n + 1);
  double t = 1.0;
  for (int m = 0; m <= n; ++m) {
    c[m] = t;
    t *= (-n + m) * (n + alpha + beta + m) / ((0.5 + beta + m) * (m + 1.0));
  }
  std::vector<double> C(2 * n + 1, 0.0);
  for (int m = 0; m <= n; ++m)
    for (int mp = 0; mp <= n; ++mp) C[m + mp] += c[m] * c[mp];
  return C;
}

// Partial sums S(K) for each K in Ks (sorted ascending).
inline std::vector<double> log_sec_partial_sums(int n, double alpha, double beta, const std::vector<long>& Ks) {
  auto C = pt_moments(n, alpha, beta);
  double N2 = std::pow(pt_normalization(n, alpha, beta), 2);
  const int J = int(C.size());
  std::vector<double> logB(J);
  double a0 = alpha + 0.5;
  for (int j = 0; j < J; ++j) logB[j] = log_beta(a0 + 1.0, beta + 0.5 + j);  // k = 1
  std::vector<double> out;
  double S = 0.0;
  long k = 1;
  for (long K : Ks) {
    for (; k <= K; ++k) {
      double t = 0.0;
      for (int j = 0; j < J; ++j) t += C[j] * std::exp(logB[j]);
      S += 0.5 * N2 * t / double(k);
      for (int j = 0; j < J; ++j) {
        double a = a0 + double(k);
        logB[j] += std::log(a / (a + beta + 0.5 + j));
      }
    }
    out.push_back(S);
  }
  return out;
}
}  // namespace detail

// <Psi_n | ln sec^2 y | Psi_n> = sum_k <sin^{2k}>/k.  Terms decay like
// k^{-(beta+3/2)}, so partial sums at K, 2K, 4K are extrapolated with the
// tail exponents beta+1/2 and beta+3/2.
inline SeriesResult log_sec_expectation(int n, double alpha, double beta, long k_max = 8192) {
  long K = std::max(16L, k_max / 4);
  auto S = detail::log_sec_partial_sums(n, alpha, beta, {K, 2 * K, 4 * K});
  double p = beta + 0.5;
  // S(K) = S - A K^-p - B K^-(p+1).
  auto solve = [&](double K1) {
    double r[3][4];
    for (int i = 0; i < 3; ++i) {
      double Ki = K1 * std::pow(2.0, i);
      r[i][0] = 1.0;
      r[i][1] = -std::pow(Ki, -p);
      r[i][2] = -std::pow(Ki, -p - 1.0);
      r[i][3] = S[i];
    }
    for (int c = 0; c < 3; ++c) {
      int piv = c;
      for (int i = c + 1; i < 3; ++i)
        if (std::abs(r[i][c]) > std::abs(r[piv][c])) piv = i;
      for (int j = 0; j < 4; ++j) std::swap(r[c][j], r[piv][j]);
      for (int i = 0; i < 3; ++i) {
        if (i == c) continue;
        double f = r[i][c] / r[c][c];
        for (int j = 0; j < 4; ++j) r[i][j] -= f * r[c][j];
      }
    }
    return r[0][3] / r[0][0];
  };
  double full = solve(double(K));
  // One-term elimination from the two finest sums as the error yardstick.
  double K2 = 2.0 * K, K4 = 4.0 * K;
  double w2 = std::pow(K2, -p), w4 = std::pow(K4, -p);
  double one = (S[2] * w2 - S[1] * w4) / (w2 - w4);
  SeriesResult r;
  r.value = full;
  r.error_estimate = std::abs(full - one);
  r.terms = 4 * K;
  return r;
}

inline SeriesResult example1_perturbation_e1(const ModelParams& p, int n, long k_max = 8192, double tol = 1e-10) {
  SeriesResult r;
  if (p.mu_p == 0.0) return r;
  auto ab = alpha_beta_from(p, Example::example1);
  auto s = log_sec_expectation(n, ab.alpha, ab.beta, k_max);
  double pref = p.mu_p / (2.0 * p.z);
  r.value = pref * s.value;
  r.error_estimate = std::abs(pref) * s.error_estimate;
  r.terms = s.terms;
  r.converged = s.error_estimate <= tol * std::abs(s.value) || s.error_estimate < 1e-12;
  return r;
}

// Quadrature oracle (mu+/(2z)) <Psi_n | ln sec^2 | Psi_n>.
inline double example1_perturbation_oracle(const ModelParams& p, int n) {
  auto ab = alpha_beta_from(p, Example::example1);
  auto f = [&](double y) {
    double v = pt_eigenfunction(n, ab.alpha, ab.beta, y);
    double c = std::cos(y);
    return v * v * (-2.0 * std::log(c));
  };
  return p.mu_p / (2.0 * p.z) * integrate_singular(f, 0.0, M_PI / 2.0, 1e-14);
}

// Second-order Rayleigh-Schrodinger term, used as the next-order estimate.
inline double example1_second_order(const ModelParams& p, int n, int j_max = 40) {
  auto ab = alpha_beta_from(p, Example::example1);
  ModelParams q = p;
  q.mu_p = 0.0;
  double En = example1_spectrum_exact(q, n);
  double sum = 0.0;
  for (int j = 0; j <= j_max; ++j) {
    if (j == n) continue;
    auto f = [&](double y) {
      return pt_eigenfunction(n, ab.alpha, ab.beta, y) * pt_eigenfunction(j, ab.alpha, ab.beta, y) *
             (-2.0 * std::log(std::cos(y)));
    };
    double v = p.mu_p / (2.0 * p.z) * integrate_singular(f, 0.0, M_PI / 2.0, 1e-12, 2 * j_max);
    sum += v * v / (En - example1_spectrum_exact(q, j));
  }
  return sum;
}

// ---------------------------------------------------------------------------
// sl(2,R) warm-up: -(mu-/2) psi'' + [mu- kappa^2 u^2 / 2 + mu- (3 + 4 lambda(lambda+2)) / (8 u^2)] psi.

inline double sl2_kappa(const ModelParams& p) {
  double k2 = (p.mu_0 * p.mu_0 + p.mu_p * p.mu_m) / (p.mu_m * p.mu_m);
  if (k2 < 0) throw std::domain_error("kappa^2 < 0: outside the bound regime");
  return std::sqrt(k2);
}

inline double sl2_spectrum(const ModelParams& p, int n) {
  return p.mu_m * sl2_kappa(p) * (2.0 * (n + 1) + p.lambda);
}

inline double sl2_eigenfunction(const ModelParams& p, int n, double u) {
  double k = sl2_kappa(p);
  double a = p.lambda + 1.0;
  double logN = 0.5 * (std::log(2.0) + (p.lambda + 2.0) * std::log(k) + log_gamma(n + 1.0) - log_gamma(n + a + 1.0));
  return std::exp(logN) * std::pow(u, p.lambda + 1.5) * std::exp(-0.5 * k * u * u) *
         generalized_laguerre(n, a, k * u * u);
}

inline ConstantMassProblem sl2_problem(const ModelParams& p, double u_max = 12.0) {
  double k = sl2_kappa(p);
  ConstantMassProblem prob;
  prob.m0 = 1.0 / p.mu_m;
  prob.U = [p, k](double u) {
    return 0.5 * p.mu_m * k * k * u * u + p.mu_m * (3.0 + 4.0 * p.lambda * (p.lambda + 2.0)) / (8.0 * u * u);
  };
  prob.y_min = 0.0;
  prob.y_max = u_max;
  prob.label = "sl2";
  return prob;
}

// ---------------------------------------------------------------------------
// Example 2.

inline std::complex<double> example2_spectrum(const ModelParams& p, int n) {
  auto tau = tau_of(p);
  double k = 2.0 * n + p.lambda + 2.0;
  return 0.5 * p.mu_m * p.z * k * k + tau * k;
}

inline ConstantMassProblem example2_potential(const ModelParams& p) {
  auto ab = alpha_beta_from(p, Example::example2);
  double t = ab.tau.real();
  ConstantMassProblem prob;
  prob.m0 = 1.0 / (p.mu_m * p.z);
  prob.U = [p, ab, t](double y) {
    double s = std::sin(y), c = std::cos(y);
    return 0.5 * p.mu_m * p.z *
           (-t * t / (p.mu_m * p.mu_m * p.z * p.z) + ab.alpha * (ab.alpha - 1.0) / (s * s) +
            ab.beta * (ab.beta - 1.0) / (c * c));
  };
  prob.y_min = 0.0;
  prob.y_max = M_PI / 2.0;
  prob.label = "example2";
  return prob;
}

struct BoxLevel {
  double epsilon = 0;
  double amplitude = 0;  // phi_n(y) = amplitude * sin(n y) on (0, pi)
};

// eta -> infinity limit; amplitude sqrt(2/pi) gives unit norm on (0, pi).
inline BoxLevel example2_box_limit(const ModelParams& p, int n) {
  if (n < 1) throw std::invalid_argument("box levels start at n = 1");
  auto tau = tau_of(p);
  BoxLevel b;
  b.epsilon = (0.5 * p.mu_m * p.z * n * n - tau * tau / (2.0 * p.mu_m * p.z)).real();
  b.amplitude = std::sqrt(2.0 / M_PI);
  return b;
}

inline ConstantMassProblem example2_box_problem(const ModelParams& p) {
  auto tau = tau_of(p);
  double c = (-tau * tau / (2.0 * p.mu_m * p.z)).real();
  ConstantMassProblem prob;
  prob.m0 = 1.0 / (p.mu_m * p.z);
  prob.U = [c](double) { return c; };
  prob.y_min = 0.0;
  prob.y_max = M_PI;
  prob.label = "box";
  return prob;
}

// H_eta = mu- e^{-2 eta} J- + z mu- e^{-eta} sinh(eta) J0^2 + tau J0.
inline Operator example2_h_eta(const ModelParams& p) {
  auto t = make_pt_realization(p.z, p.lambda);
  double tau = tau_of(p).real();
  return scale(t.minus, p.mu_m * std::exp(-2.0 * p.eta)) +
         scale(compose(t.zero, t.zero), p.z * p.mu_m * std::exp(-p.eta) * std::sinh(p.eta)) + scale(t.zero, tau);
}

// Mass function of the eta-family.
inline CoefficientFunction example2_mass(const ModelParams& p) {
  return coeff([p](const Jet& X) {
    Jet t = 1.0 - exp(X * (-2.0 * I * p.z));
    return (p.z / p.mu_m) / (std::exp(-2.0 * p.eta) * t * (1.0 - (1.0 - std::exp(2.0 * p.eta)) * t));
  });
}

// ---------------------------------------------------------------------------
// Example 3.

// Constant-mass potential of the pipeline.  The y^2 lambda(lambda+2)
// coefficient is 2; with 1 (the _half_lambda variant below) the z -> 0
// limit would lose half of the lambda(lambda+2)/(8 y^2) barrier.
inline double example3_potential(const ModelParams& p, double y) {
  const double z = p.z, l = p.lambda, y2 = y * y, z2 = z * z;
  const double D = 2.0 * y2 + z2, r = std::sqrt(D);
  return p.mu_0 * (3.0 - 2.0 * z / r) + 2.0 * p.mu_0 * p.mu_0 / p.mu_m * y2 * D / ((z + r) * (z + r)) +
         p.mu_m / 4.0 * (2.0 * y2 * l * (l + 2.0) + z2 * (2.0 + 2.0 * l + l * l)) / (D * D) +
         p.mu_p / 2.0 * (y2 + z2) / (D * D) +
         (p.mu_p == p.mu_m ? 0.0 : (p.mu_p - p.mu_m) * z2 * z2 / (8.0 * y2 * D * D));
}

inline double example3_potential_half_lambda(const ModelParams& p, double y) {
  const double z = p.z, l = p.lambda, y2 = y * y, z2 = z * z;
  const double D = 2.0 * y2 + z2;
  return example3_potential(p, y) - p.mu_m / 4.0 * y2 * l * (l + 2.0) / (D * D);
}

enum class Example3Limit { z_to_zero, z_to_infinity };

inline double example3_limit(const ModelParams& p, double y, Example3Limit which) {
  double y2 = y * y;
  if (which == Example3Limit::z_to_infinity)
    return p.mu_0 * p.mu_0 * y2 / (2.0 * p.mu_m) + p.mu_0 + (p.mu_p == p.mu_m ? 0.0 : (p.mu_p - p.mu_m) / (8.0 * y2));
  return 3.0 * p.mu_0 + 2.0 * p.mu_0 * p.mu_0 / p.mu_m * y2 +
         (p.mu_m * p.lambda * (p.lambda + 2.0) + p.mu_p) / (8.0 * y2);
}

inline bool example3_has_pole(const ModelParams& p) { return p.z == 0.0 || p.mu_p != p.mu_m; }

// z may be 0 or +inf (closed-form limits).  With a pole at y = 0 the problem
// lives on (0, L); otherwise on (-L, L).  -(mu-/2) psi'' + U psi = E psi.
inline ConstantMassProblem example3_problem(const ModelParams& p, double L = 8.0) {
  ConstantMassProblem prob;
  prob.m0 = 1.0 / p.mu_m;
  if (p.z == 0.0) {
    prob.U = [p](double y) { return example3_limit(p, y, Example3Limit::z_to_zero); };
  } else if (std::isinf(p.z)) {
    prob.U = [p](double y) { return example3_limit(p, y, Example3Limit::z_to_infinity); };
  } else {
    prob.U = [p](double y) { return example3_potential(p, y); };
  }
  bool pole = std::isinf(p.z) ? p.mu_p != p.mu_m : example3_has_pole(p);
  prob.y_min = pole ? 0.0 : -L;
  prob.y_max = L;
  prob.label = "example3";
  return prob;
}

// ---------------------------------------------------------------------------
// Finite-dimensional comparison formulas.

enum class FiniteDim { ek, ekfd1, ex2fd };

inline std::vector<int> finite_dim_k_values(int d) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  std::vector<int> k;
  if (d % 2 == 1) {
    for (int m = 0; m <= (d - 1) / 2; ++m) k.push_back(2 * m);
  } else {
    for (int m = 0; m <= d / 2; ++m) k.push_back(2 * m + 1);
  }
  return k;
}

inline double finite_dim_value(FiniteDim which, const ModelParams& p, int k, int sign) {
  double base = 0.5 * p.mu_m * p.z * k * k;
  switch (which) {
    case FiniteDim::ek:
      return base + sign * k * p.mu_0;
    case FiniteDim::ekfd1:
      return base + sign * std::sqrt(k * k * p.mu_0 * p.mu_0 + k * p.mu_m * p.mu_p);
    case FiniteDim::ex2fd:
      return base + sign * k * tau_of(p).real();
  }
  return 0.0;
}

// Both branches for every admissible k; k = 0 contributes once.
inline std::vector<double> finite_dim_eigenvalues(FiniteDim which, const ModelParams& p, int d) {
  std::vector<double> out;
  for (int k : finite_dim_k_values(d)) {
    out.push_back(finite_dim_value(which, p, k, +1));
    if (k != 0) out.push_back(finite_dim_value(which, p, k, -1));
  }
  return out;
}

// |E_n - E_k^FD| with E_n = E_n^0 + E_n^1 and k = 2n + lambda + 2.
inline std::vector<double> fig4_difference(const ModelParams& p, int n, const std::vector<double>& zs,
                                           int branch = -1) {
  std::vector<double> out;
  for (double z : zs) {
    ModelParams q = p;
    q.z = z;
    ModelParams q0 = q;
    q0.mu_p = 0.0;
    double E = example1_spectrum_exact(q0, n) + example1_perturbation_e1(q, n).value;
    double k = 2.0 * n + p.lambda + 2.0;
    double fd = 0.5 * q.mu_m * z * k * k + branch * std::sqrt(k * k * q.mu_0 * q.mu_0 + k * q.mu_m * q.mu_p);
    out.push_back(std::abs(E - fd));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Double-well trigonometric family, -psi''/2 + u psi = eps psi on (-pi/2, pi/2).

struct DwtParams {
  double a = 0, b = 0, c = 0, d = 0;
};

inline DwtParams dwt_from_couplings(double g, double z, double c1, double c2, double c3, double c4) {
  double s = 2.0 / (g * z);
  return {s * c1, s * c2, s * c3, s * c4};
}

inline double dwt_potential(const DwtParams& w, double y) {
  if (std::abs(y) >= M_PI / 2.0) throw std::domain_error("dwt_potential: |y| >= pi/2");
  double s = std::sin(y), c = std::cos(y);
  return 0.5 * w.d * s * s / (c * c) - 0.5 * w.a * s - 0.5 * w.b * s * s + 0.5 * w.c * s / (c * c);
}

inline ConstantMassProblem dwt_problem(const DwtParams& w) {
  ConstantMassProblem prob;
  prob.m0 = 1.0;
  prob.U = [w](double y) { return dwt_potential(w, y); };
  prob.y_min = -M_PI / 2.0;
  prob.y_max = M_PI / 2.0;
  prob.label = "dwt";
  return prob;
}

// psi = e^{-sqrt(b) s} (1+s)^{(1/2+beta)/2} (1-s)^{(1/2+gamma)/2} H((1+s)/2), s = sin y.
inline HeunParams dwt_heun_params(const DwtParams& w, double eps) {
  HeunParams h;
  h.alpha = -4.0 * std::sqrt(w.b);
  h.beta = std::sqrt(0.25 + w.d - w.c);
  h.gamma = -std::sqrt(0.25 + w.d + w.c);
  h.delta = -2.0 * w.a;
  h.eta = 0.375 + w.a - w.b - 0.5 * w.d - 2.0 * eps;
  return h;
}

inline bool dwt_is_heun_family(const DwtParams& w) { return std::abs(w.c - std::sqrt(w.d)) < 1e-12 * (1.0 + w.c); }

struct HeunSpectrumOptions {
  std::vector<double> deltas{1e-4, 1e-5, 1e-6};
  int count_samples = 2000;
  double tol = 1e-13;
  bool require_family = true;  // insist on c = sqrt(d)
};

// Number of eigenvalues below eps: zeros of the left solution plus one if
// the extrapolated boundary value and the last sample disagree in sign.
inline int dwt_heun_count(const DwtParams& w, double eps, const HeunSpectrumOptions& opt) {
  auto bf = heun_boundary_functional(dwt_heun_params(w, eps), opt.deltas, opt.count_samples);
  int n = bf.interior_zeros;
  if ((bf.value > 0) != (bf.last_sample > 0)) ++n;
  return n;
}

inline std::vector<double> dwt_heun_eigenvalues(const DwtParams& w, int n_states, HeunSpectrumOptions opt = {}) {
  if (opt.require_family && !dwt_is_heun_family(w))
    throw std::invalid_argument("dwt_heun_spectrum: requires c_s = sqrt(d_s)");
  double umin = 1e300;
  for (int i = 1; i < 2000; ++i) umin = std::min(umin, dwt_potential(w, -M_PI / 2 + M_PI * i / 2000.0));
  double lo0 = umin - 1.0;
  double hi = std::max(umin + 1.0, 1.0);
  while (dwt_heun_count(w, hi, opt) < n_states) hi = umin + 2.0 * (hi - umin);
  std::vector<double> ev;
  for (int k = 0; k < n_states; ++k) {
    double lo = k == 0 ? lo0 : ev.back();
    double h = hi;
    // Count bisection down to a narrow bracket, then the functional's sign.
    for (int it = 0; it < 60 && h - lo > 1e-6 * std::max(1.0, std::abs(h)); ++it) {
      double mid = 0.5 * (lo + h);
      if (dwt_heun_count(w, mid, opt) > k)
        h = mid;
      else
        lo = mid;
    }
    double flo = heun_boundary_functional(dwt_heun_params(w, lo), opt.deltas, 16).value;
    double fhi = heun_boundary_functional(dwt_heun_params(w, h), opt.deltas, 16).value;
    if ((flo > 0) == (fhi > 0)) throw std::runtime_error("dwt_heun_spectrum: root bracketing failure");
    while (h - lo > opt.tol * std::max(1.0, std::abs(lo))) {
      double mid = 0.5 * (lo + h);
      if (mid <= lo || mid >= h) break;
      double f = heun_boundary_functional(dwt_heun_params(w, mid), opt.deltas, 16).value;
      if ((f > 0) == (flo > 0)) {
        lo = mid;
        flo = f;
      } else {
        h = mid;
      }
    }
    ev.push_back(0.5 * (lo + h));
  }
  return ev;
}

// Eigenfunction on the given y-points: left Heun solution up to q = 1/2,
// right solution from the q = 1 asymptotics (1-q)^{-gamma}, matched in value.
inline std::vector<double> dwt_heun_eigenfunction(const DwtParams& w, double eps, const std::vector<double>& ys) {
  HeunParams hp = dwt_heun_params(w, eps);
  std::vector<double> ql, qr;
  std::vector<size_t> il, ir;
  for (size_t i = 0; i < ys.size(); ++i) {
    double q = 0.5 * (1.0 + std::sin(ys[i]));
    if (q <= 0.5) {
      ql.push_back(q);
      il.push_back(i);
    } else {
      qr.push_back(q);
      ir.push_back(i);
    }
  }
  std::vector<double> out(ys.size(), 0.0);
  // Left piece (sorted ascending in q because ys ascend).
  auto left_targets = ql;
  left_targets.push_back(0.5);
  auto lv = heun_left_solution(hp, left_targets);
  double left_mid = lv.back().y;
  // Right piece integrated from q = 1 - d0 down to 1/2.
  const double d0 = 1e-9;
  HeunValue start{1.0, hp.gamma / d0, true};
  std::vector<double> rt(qr.rbegin(), qr.rend());
  rt.push_back(0.5);
  auto rv = heun_integrate(hp, 1.0 - d0, start, rt);
  double right_mid = rv.back().y;
  double scale = left_mid / right_mid;
  auto prefactor = [&](double s) {
    return std::exp(-std::sqrt(w.b) * s + 0.5 * (0.5 + hp.beta) * std::log1p(s) +
                    0.5 * (0.5 + hp.gamma) * std::log1p(-s));
  };
  for (size_t j = 0; j < il.size(); ++j) {
    double s = std::sin(ys[il[j]]);
    out[il[j]] = prefactor(s) * lv[j].y;
  }
  for (size_t j = 0; j < ir.size(); ++j) {
    size_t i = ir[ir.size() - 1 - j];
    double s = std::sin(ys[i]);
    // Combine (1-s)^{(1/2+gamma)/2} with (1-q)^{-gamma} analytically near the wall.
    out[i] = prefactor(s) * rv[j].y * scale;
  }
  return out;
}

inline Spectrum dwt_heun_spectrum(const DwtParams& w, int n_states, const Grid& grid, HeunSpectrumOptions opt = {}) {
  auto ev = dwt_heun_eigenvalues(w, n_states, opt);
  Spectrum sp;
  sp.grid = grid;
  auto ys = grid.values();
  for (int k = 0; k < n_states; ++k) {
    SpectrumEntry e;
    e.n = k;
    e.E = ev[k];
    e.psi = dwt_heun_eigenfunction(w, ev[k], ys);
    double nrm = std::sqrt(overlap(e.psi, e.psi, grid, false));
    for (auto& v : e.psi) v /= nrm;
    fix_sign(e.psi);
    sp.entries.push_back(std::move(e));
  }
  return sp;
}

// Symmetric family a = c = 0 with d = m^2 - 1/4: psi = cos^{1/2} y S(sin y),
// S oblate with c^2 = b.
inline double dwt_order(const DwtParams& w) { return std::sqrt(w.d + 0.25); }

inline double dwt_symmetric_spectrum(double b, double m, int n) {
  SpheroidalIndex idx{m, n, b, SpheroidalKind::oblate};
  return 0.5 * (spheroidal_eigenvalue(idx) + 0.5 - m * m);
}

inline double dwt_symmetric_eigenfunction(double b, double m, int n, double y) {
  SpheroidalIndex idx{m, n, b, SpheroidalKind::oblate};
  return std::sqrt(std::cos(y)) * spheroidal_function(idx, std::sin(y));
}

inline std::vector<double> dwt_symmetric_samples(double b, double m, int n, const std::vector<double>& ys) {
  SpheroidalIndex idx{m, n, b, SpheroidalKind::oblate};
  auto sol = spheroidal_solve(idx);
  std::vector<double> v;
  for (double y : ys) v.push_back(std::sqrt(std::cos(y)) * spheroidal_eval(idx, sol, std::sin(y)));
  return v;
}

// ---------------------------------------------------------------------------
// PCT pipelines: Hamiltonian -> PDM form -> contour x = i xi -> constant mass.

struct Pipeline {
  PdmSystem pdm;
  ContourPdm contour;
  CoordinateMap map;
  double scale = 1.0;          // y = scale * u
  ConstantMassProblem problem;  // in y
};

namespace detail {
inline Pipeline finish_pipeline(PdmSystem pdm, double m0, double xi_min, double xi_max, double xi_ref, double u_ref,
                                double scale) {
  Pipeline pl;
  pl.pdm = std::move(pdm);
  pl.contour = to_contour(pl.pdm, m0);
  pl.map = pct_forward(pl.contour.M, xi_min, xi_max, xi_ref, u_ref);
  pl.scale = scale;
  pl.problem = pct_potential(pl.contour, pl.map).rescaled(scale);
  return pl;
}
}  // namespace detail

// Constant mu's with mu+ J+ = -i mu+ x.
inline Pipeline example1_pipeline(const ModelParams& p) {
  auto pdm = pdm_from_generic(CoefficientFunction::constant(p.mu_m), CoefficientFunction::constant(p.mu_0),
                              coeff([mp = p.mu_p](const Jet& X) { return X * (-I * mp); }), p.z, p.lambda);
  // Anchor at y = pi/4, xi = ln(sec^2 y)/(2z).
  double s = std::sqrt(p.z);
  auto pl = detail::finish_pipeline(pdm, 1.0 / p.mu_m, 0.0, std::numeric_limits<double>::infinity(),
                                    std::log(2.0) / (2.0 * p.z), (M_PI / 4.0) / s, s);
  pl.problem.label = "example1-pipeline";
  return pl;
}

inline Pipeline sl2_pipeline(const ModelParams& p) {
  Triple t = make_pt_realization(0.0, p.lambda);
  Operator H = scale(t.minus, p.mu_m) + scale(t.zero, p.mu_0) + scale(t.plus, p.mu_p);
  // u = sqrt(2 xi); anchor at u = 1.
  auto pl = detail::finish_pipeline(pdm_from_operator(H), 1.0 / p.mu_m, 0.0, std::numeric_limits<double>::infinity(),
                                    0.5, 1.0, 1.0);
  pl.problem.label = "sl2-pipeline";
  return pl;
}

inline Pipeline example2_pipeline(const ModelParams& p) {
  double e2 = std::exp(-2.0 * p.eta);
  double xi_max = p.eta > 0 ? -std::log1p(-e2) / (2.0 * p.z) : std::numeric_limits<double>::infinity();
  double s = std::sqrt(p.mu_m * p.z);
  double xi_ref = -std::log1p(-0.5 * e2) / (2.0 * p.z);
  auto pl = detail::finish_pipeline(pdm_from_operator(example2_h_eta(p)), 1.0, 0.0, xi_max, xi_ref,
                                    (M_PI / 4.0) / s, s);
  pl.problem.label = "example2-pipeline";
  return pl;
}

// Closed-form map xi = -ln(1 - e^{-2 eta} sin^2 y)/(2z), y = u sqrt(mu- z).
inline CoordinateMap example2_closed_form_map(const ModelParams& p) {
  double e2 = std::exp(-2.0 * p.eta), s = std::sqrt(p.mu_m * p.z), z = p.z;
  CoordinateMap m;
  m.F = [=](double u) {
    double sn = std::sin(u * s);
    return -std::log1p(-e2 * sn * sn) / (2.0 * z);
  };
  m.w = [=](double xi) { return std::asin(std::sqrt(-std::expm1(-2.0 * z * xi) / e2)) / s; };
  m.jacobian = [=](double u) {
    double sn = std::sin(u * s), cs = std::cos(u * s);
    return e2 * sn * cs * s / (z * (1.0 - e2 * sn * sn));
  };
  m.xi_min = 0.0;
  m.xi_max = p.eta > 0 ? -std::log1p(-e2) / (2.0 * z) : std::numeric_limits<double>::infinity();
  m.u_min = 0.0;
  m.u_max = (M_PI / 2.0) / s;
  return m;
}

inline Pipeline example2_pipeline_closed_form(const ModelParams& p) {
  Pipeline pl;
  pl.pdm = pdm_from_operator(example2_h_eta(p));
  pl.contour = to_contour(pl.pdm, 1.0);
  pl.map = example2_closed_form_map(p);
  pl.scale = std::sqrt(p.mu_m * p.z);
  pl.problem = pct_potential(pl.contour, pl.map).rescaled(pl.scale);
  pl.problem.label = "example2-pipeline";
  return pl;
}

// mu-(x) = i mu- e^{ixz} sin(xz) tan^2(xz)/z^3, mu+(x) = -(mu+/4) sin^2(xz)/z^2,
// negative branch xi < 0 with u = z / (sqrt(2 mu-) |sinh(z xi)|).
inline Pipeline example3_pipeline(const ModelParams& p) {
  const double z = p.z, mm = p.mu_m, mp = p.mu_p;
  auto mu_m = coeff([=](const Jet& X) {
    Jet t = tan(X * z);
    return exp(X * (I * z)) * sin(X * z) * t * t * (I * mm / (z * z * z));
  });
  auto mu_p = coeff([=](const Jet& X) {
    Jet sn = sin(X * z);
    return sn * sn * (-mp / (4.0 * z * z));
  });
  auto pdm = pdm_from_generic(mu_m, CoefficientFunction::constant(p.mu_0), mu_p, z, p.lambda);
  double xi_ref = -std::asinh(z / std::sqrt(2.0 * mm)) / z;
  auto pl = detail::finish_pipeline(pdm, 1.0, -std::numeric_limits<double>::infinity(), 0.0, xi_ref, 1.0,
                                    std::sqrt(mm));
  pl.problem.label = "example3-pipeline";
  return pl;
}

}  // namespace deformed_spectra
