#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <stdexcept>
#include <vector>

#include "jet.hpp"

namespace deformed_spectra {

inline constexpr cplx I{0.0, 1.0};

// Coefficient of a differential operator.  The function returns the Taylor
// jet at the requested point, so every derivative is available exactly.
class CoefficientFunction {
 public:
  CoefficientFunction() = default;
  explicit CoefficientFunction(JetFn f) : f_(std::move(f)) {}

  static CoefficientFunction constant(cplx c) {
    return CoefficientFunction([c](cplx) { return Jet::constant(c); });
  }

  Jet jet(cplx x) const { return f_(x); }
  cplx eval(cplx x) const { return f_(x).value(); }
  cplx deriv1(cplx x) const { return f_(x).deriv(1); }
  cplx deriv2(cplx x) const { return f_(x).deriv(2); }
  cplx deriv(cplx x, int k) const { return f_(x).deriv(k); }
  explicit operator bool() const { return static_cast<bool>(f_); }

 private:
  JetFn f_;
};

// Test functions share the representation; they need derivatives up to 4.
using TestFunction = CoefficientFunction;

// Builds a coefficient from an expression in the variable jet X = x0 + t.
template <class F>
CoefficientFunction coeff(F expr) {
  return CoefficientFunction([expr](cplx x0) { return expr(Jet::variable(x0)); });
}

class LinearDifferentialOperator {
 public:
  static constexpr int max_order = 4;

  LinearDifferentialOperator() = default;
  // coeffs[k] multiplies d^k/dx^k; an empty CoefficientFunction is zero.
  explicit LinearDifferentialOperator(std::vector<CoefficientFunction> coeffs)
      : c_(std::move(coeffs)) {
    trim();
    if (order() > max_order) throw std::invalid_argument("operator order exceeds 4");
  }

  static LinearDifferentialOperator identity() {
    return LinearDifferentialOperator({CoefficientFunction::constant(1.0)});
  }
  static LinearDifferentialOperator multiplication(CoefficientFunction f) {
    return LinearDifferentialOperator({std::move(f)});
  }
  static LinearDifferentialOperator derivative() {
    return LinearDifferentialOperator({CoefficientFunction{}, CoefficientFunction::constant(1.0)});
  }

  int order() const { return static_cast<int>(c_.size()) - 1; }
  bool has(int k) const { return k >= 0 && k < int(c_.size()) && static_cast<bool>(c_[k]); }
  const CoefficientFunction& coefficient(int k) const { return c_.at(k); }
  const std::vector<CoefficientFunction>& coefficients() const { return c_; }

  // Jets of all coefficients at x (zero jets for absent entries).
  std::vector<Jet> jets(cplx x) const {
    std::vector<Jet> r(c_.size(), Jet::constant(0.0));
    for (size_t k = 0; k < c_.size(); ++k)
      if (c_[k]) r[k] = c_[k].jet(x);
    return r;
  }

 private:
  void trim() {
    while (!c_.empty() && !c_.back()) c_.pop_back();
  }
  std::vector<CoefficientFunction> c_;
};

using Operator = LinearDifferentialOperator;

inline cplx apply(const Operator& op, const TestFunction& f, cplx x) {
  Jet fj = f.jet(x);
  if (op.order() >= fj.valid()) throw std::invalid_argument("test function lacks derivatives");
  cplx s = 0.0;
  for (int k = 0; k <= op.order(); ++k)
    if (op.has(k)) s += op.coefficient(k).eval(x) * fj.deriv(k);
  return s;
}

// Action on a jet: returns the jet of (op f) about the same point, with
// valid order reduced by op.order().
inline Jet apply_jet(const Operator& op, const Jet& f, cplx x) {
  Jet r = Jet::constant(0.0);
  bool first = true;
  for (int k = 0; k <= op.order(); ++k) {
    if (!op.has(k)) continue;
    Jet term = op.coefficient(k).jet(x) * f.differentiate(k);
    if (first) {
      r = term;
      first = false;
    } else {
      r += term;
    }
  }
  if (first) r = Jet(0.0, std::max(f.valid() - op.order(), 1));
  return r;
}

inline Operator scale(const Operator& a, cplx s) {
  std::vector<CoefficientFunction> c(a.order() + 1);
  for (int k = 0; k <= a.order(); ++k) {
    if (!a.has(k)) continue;
    auto ak = a.coefficient(k);
    c[k] = CoefficientFunction([ak, s](cplx x) { return ak.jet(x) * s; });
  }
  return Operator(std::move(c));
}

inline Operator combine(const Operator& a, cplx sa, const Operator& b, cplx sb) {
  int n = std::max(a.order(), b.order());
  std::vector<CoefficientFunction> c(n + 1);
  for (int k = 0; k <= n; ++k) {
    bool ha = a.has(k), hb = b.has(k);
    if (!ha && !hb) continue;
    CoefficientFunction ak = ha ? a.coefficient(k) : CoefficientFunction{};
    CoefficientFunction bk = hb ? b.coefficient(k) : CoefficientFunction{};
    c[k] = CoefficientFunction([ak, bk, sa, sb, ha, hb](cplx x) {
      if (ha && hb) return ak.jet(x) * sa + bk.jet(x) * sb;
      return ha ? ak.jet(x) * sa : bk.jet(x) * sb;
    });
  }
  return Operator(std::move(c));
}

inline Operator operator+(const Operator& a, const Operator& b) { return combine(a, 1.0, b, 1.0); }
inline Operator operator-(const Operator& a, const Operator& b) { return combine(a, 1.0, b, -1.0); }
inline Operator operator*(cplx s, const Operator& a) { return scale(a, s); }

namespace detail {
inline double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Leibniz expansion of A∘B, optionally skipping the top-order term (which
// cancels identically in a commutator).
inline Operator compose_impl(const Operator& A, const Operator& B, bool drop_top) {
  int order = A.order() + B.order();
  if (order > Operator::max_order) throw std::invalid_argument("composition order exceeds 4");
  int top = drop_top ? order - 1 : order;
  if (top < 0) return Operator();
  std::vector<CoefficientFunction> c(top + 1);
  for (int k = 0; k <= top; ++k) {
    bool any = false;
    for (int i = 0; i <= A.order(); ++i)
      for (int j = 0; j <= B.order(); ++j)
        for (int m = 0; m <= i; ++m)
          if (j + i - m == k && A.has(i) && B.has(j)) any = true;
    if (!any) continue;
    c[k] = CoefficientFunction([A, B, k](cplx x) {
      auto a = A.jets(x);
      auto b = B.jets(x);
      Jet s(0.0);
      bool first = true;
      for (int i = 0; i <= A.order(); ++i) {
        if (!A.has(i)) continue;
        for (int j = 0; j <= B.order(); ++j) {
          if (!B.has(j)) continue;
          int m = j + i - k;
          if (m < 0 || m > i) continue;
          Jet t = a[i] * b[j].differentiate(m) * binom(i, m);
          if (first) {
            s = t;
            first = false;
          } else {
            s += t;
          }
        }
      }
      return s;
    });
  }
  return Operator(std::move(c));
}
}  // namespace detail

inline Operator compose(const Operator& A, const Operator& B) {
  return detail::compose_impl(A, B, false);
}

// [A,B] with the structurally vanishing top coefficient removed.
inline Operator commutator(const Operator& A, const Operator& B) {
  auto ab = detail::compose_impl(A, B, true);
  auto ba = detail::compose_impl(B, A, true);
  return ab - ba;
}

// Realization triple plus the multiplication operator e^{2 z j+}.
struct Triple {
  Operator plus, zero, minus;
  CoefficientFunction exp2z;  // e^{2 z j+} as a function of x
  double z = 0.0;
  double lambda = 0.0;
};

inline Triple make_classical_realization(double lambda) {
  Triple t;
  t.z = 0.0;
  t.lambda = lambda;
  t.plus = Operator::multiplication(coeff([](const Jet& X) { return X; }));
  t.zero = Operator({coeff([lambda](const Jet& X) { return Jet(-lambda, X.valid()); }),
                     coeff([](const Jet& X) { return 2.0 * X; })});
  t.minus = Operator({CoefficientFunction{}, CoefficientFunction::constant(lambda),
                      coeff([](const Jet& X) { return -X; })});
  t.exp2z = CoefficientFunction::constant(1.0);
  return t;
}

struct RealizationOptions {
  // Mutation hook for the verification battery: flips the sign of the
  // first-derivative coefficient of j-.
  bool inject_sign_fault = false;
};

inline Triple make_deformed_realization(double z, double lambda, RealizationOptions opt = {}) {
  if (z == 0.0) throw std::invalid_argument("z = 0: use make_classical_realization");
  Triple t;
  t.z = z;
  t.lambda = lambda;
  auto e = [z](const Jet& X) { return exp(X * (2.0 * z)); };
  double sgn = opt.inject_sign_fault ? -1.0 : 1.0;
  t.plus = Operator::multiplication(coeff([](const Jet& X) { return X; }));
  t.zero = Operator({coeff([=](const Jet& X) { return (e(X) + 1.0) * (-lambda / 2.0); }),
                     coeff([=](const Jet& X) { return (e(X) - 1.0) / z; })});
  t.minus = Operator({coeff([=](const Jet& X) { return (e(X) - 1.0) * (-z * lambda * lambda / 8.0); }),
                      coeff([=](const Jet& X) { return (e(X) + 1.0) * (sgn * lambda / 2.0); }),
                      coeff([=](const Jet& X) { return (e(X) - 1.0) * (-1.0 / (2.0 * z)); })});
  t.exp2z = coeff(e);
  return t;
}

inline Triple make_pt_realization(double z, double lambda, RealizationOptions opt = {}) {
  Triple t;
  t.z = z;
  t.lambda = lambda;
  double sgn = opt.inject_sign_fault ? -1.0 : 1.0;
  t.plus = Operator::multiplication(coeff([](const Jet& X) { return X * (-I); }));
  if (z == 0.0) {
    t.zero = Operator({coeff([lambda](const Jet& X) { return Jet(-lambda, X.valid()); }),
                       coeff([](const Jet& X) { return 2.0 * X; })});
    t.minus = Operator({CoefficientFunction{}, CoefficientFunction::constant(sgn * I * lambda),
                        coeff([](const Jet& X) { return X * (-I); })});
    t.exp2z = CoefficientFunction::constant(1.0);
    return t;
  }
  auto ph = [z](const Jet& X) { return exp(X * (-I * z)); };
  auto s = [z](const Jet& X) { return sin(X * z); };
  auto c = [z](const Jet& X) { return cos(X * z); };
  t.zero = Operator({coeff([=](const Jet& X) { return ph(X) * c(X) * (-lambda); }),
                     coeff([=](const Jet& X) { return ph(X) * s(X) * (2.0 / z); })});
  t.minus = Operator({coeff([=](const Jet& X) { return ph(X) * s(X) * (0.25 * I * lambda * lambda * z); }),
                      coeff([=](const Jet& X) { return ph(X) * c(X) * (sgn * I * lambda); }),
                      coeff([=](const Jet& X) { return ph(X) * s(X) * (-I / z); })});
  t.exp2z = coeff([z](const Jet& X) { return exp(X * (-2.0 * I * z)); });
  return t;
}

// Standard probe battery: analytic in a neighbourhood of the real axis.
inline std::vector<TestFunction> standard_test_functions() {
  return {
      coeff([](const Jet& X) { return exp(X * 0.3); }),
      coeff([](const Jet& X) { return sin(X) + X * X; }),
      coeff([](const Jet& X) { return 1.0 / (X + 2.0); }),
      coeff([](const Jet& X) { return cos(X * 1.3) * exp(X * 0.5); }),
      coeff([](const Jet& X) { return X * X * X - X + 1.0; }),
  };
}

struct Residuals {
  double r1 = 0.0, r2 = 0.0, r3 = 0.0;
  double max() const { return std::max({r1, r2, r3}); }
};

inline Residuals commutation_residuals(const Triple& t, double x,
                                       const std::vector<TestFunction>& battery = standard_test_functions()) {
  const double z = t.z;
  Operator rhs1;
  if (z == 0.0) {
    rhs1 = scale(t.plus, 2.0);
  } else {
    auto e = t.exp2z;
    rhs1 = Operator::multiplication(
        CoefficientFunction([e, z](cplx x0) { return (e.jet(x0) - 1.0) / z; }));
  }
  Operator d1 = commutator(t.zero, t.plus) - rhs1;
  Operator d2 = commutator(t.zero, t.minus) + scale(t.minus, 2.0);
  if (z != 0.0) d2 = d2 - scale(compose(t.zero, t.zero), z);
  Operator d3 = commutator(t.plus, t.minus) - t.zero;
  Residuals r;
  for (const auto& f : battery) {
    r.r1 = std::max(r.r1, std::abs(apply(d1, f, x)));
    r.r2 = std::max(r.r2, std::abs(apply(d2, f, x)));
    r.r3 = std::max(r.r3, std::abs(apply(d3, f, x)));
  }
  return r;
}

// Casimir operator built by composition; the z = 0 case uses its limit
// 1/2 j0^2 + j+ j- + j- j+.
inline Operator casimir_operator(const Triple& t) {
  const double z = t.z;
  if (z == 0.0) {
    return scale(compose(t.zero, t.zero), 0.5) + compose(t.plus, t.minus) + compose(t.minus, t.plus);
  }
  auto e = t.exp2z;
  auto einv = CoefficientFunction([e](cplx x) { return 1.0 / e.jet(x); });
  Operator E = Operator::multiplication(einv);
  Operator K = Operator::multiplication(
      CoefficientFunction([einv, z](cplx x) { return (1.0 - einv.jet(x)) / (2.0 * z); }));
  Operator C = scale(compose(t.zero, compose(E, t.zero)), 0.5);
  C = C + compose(K, t.minus) + compose(t.minus, K);
  C = C + E - Operator::identity();
  return C;
}

inline cplx casimir_residual(const Triple& t, double lambda, const TestFunction& f, double x) {
  Operator C = casimir_operator(t);
  return apply(C, f, x) - 0.5 * lambda * (lambda + 2.0) * f.eval(x);
}

struct AlgebraReport {
  double max_commutator = 0.0;
  double max_casimir = 0.0;
  int evaluations = 0;
};

struct AlgebraBattery {
  std::vector<double> z{0.1, 0.5, 1.0, 2.0};
  std::vector<double> lambda{0.0, 1.0, 2.0, 3.7};
  int n_points = 20;
  bool pt = false;
  RealizationOptions options{};
};

// Grid on (-1, 1) excluding the endpoints.
inline std::vector<double> battery_grid(int n) {
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = -1.0 + 2.0 * (i + 0.5) / n;
  return x;
}

inline AlgebraReport run_algebra_battery(const AlgebraBattery& b) {
  AlgebraReport rep;
  auto fs = standard_test_functions();
  auto xs = battery_grid(b.n_points);
  for (double z : b.z) {
    for (double lam : b.lambda) {
      Triple t;
      if (b.pt) {
        t = make_pt_realization(z, lam, b.options);
      } else if (z == 0.0) {
        t = make_classical_realization(lam);
      } else {
        t = make_deformed_realization(z, lam, b.options);
      }
      Operator C = casimir_operator(t);
      for (double x : xs) {
        auto r = commutation_residuals(t, x, fs);
        rep.max_commutator = std::max(rep.max_commutator, r.max());
        for (const auto& f : fs) {
          cplx v = apply(C, f, x) - 0.5 * lam * (lam + 2.0) * f.eval(x);
          rep.max_casimir = std::max(rep.max_casimir, std::abs(v));
        }
        ++rep.evaluations;
      }
    }
  }
  return rep;
}

}  // namespace deformed_spectra
