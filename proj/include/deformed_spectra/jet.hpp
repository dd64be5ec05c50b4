#pragma once

// Truncated Taylor series f(x0 + t) = sum_k c[k] t^k.  Used as forward-mode
// automatic differentiation so that operator composition sees exact
// coefficient derivatives.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>

namespace deformed_spectra {

using cplx = std::complex<double>;

class Jet {
 public:
  static constexpr int capacity = 14;

  Jet() { c_.fill(0.0); }
  explicit Jet(cplx value, int valid = capacity) : valid_(valid) {
    c_.fill(0.0);
    c_[0] = value;
  }

  static Jet constant(cplx v) { return Jet(v); }
  static Jet variable(cplx x0) {
    Jet j(x0);
    j.c_[1] = 1.0;
    return j;
  }

  int valid() const { return valid_; }
  cplx operator[](int k) const { return c_[k]; }
  cplx& operator[](int k) { return c_[k]; }
  cplx value() const { return c_[0]; }

  // k-th derivative at x0; requires k < valid().
  cplx deriv(int k) const {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return c_[k] * f;
  }

  // Series of the m-th derivative.
  Jet differentiate(int m = 1) const {
    Jet r;
    r.valid_ = std::max(valid_ - m, 0);
    for (int k = 0; k < r.valid_; ++k) {
      double f = 1.0;
      for (int i = k + 1; i <= k + m; ++i) f *= i;
      r.c_[k] = c_[k + m] * f;
    }
    return r;
  }

  // Antiderivative with zero constant term.
  Jet integrate() const {
    Jet r;
    r.valid_ = std::min(valid_ + 1, capacity);
    for (int k = 1; k < r.valid_; ++k) r.c_[k] = c_[k - 1] / double(k);
    return r;
  }

  // g(t) = f(s t): used when the expansion variable is rotated, x = i xi.
  Jet scale_variable(cplx s) const {
    Jet r = *this;
    cplx p = 1.0;
    for (int k = 0; k < valid_; ++k) {
      r.c_[k] *= p;
      p *= s;
    }
    return r;
  }

  Jet& operator+=(const Jet& o) {
    valid_ = std::min(valid_, o.valid_);
    for (int k = 0; k < valid_; ++k) c_[k] += o.c_[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    valid_ = std::min(valid_, o.valid_);
    for (int k = 0; k < valid_; ++k) c_[k] -= o.c_[k];
    return *this;
  }
  Jet& operator*=(cplx s) {
    for (int k = 0; k < valid_; ++k) c_[k] *= s;
    return *this;
  }
  Jet& operator+=(cplx s) {
    c_[0] += s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator-(Jet a) { return a *= -1.0; }
  friend Jet operator*(Jet a, cplx s) { return a *= s; }
  friend Jet operator*(cplx s, Jet a) { return a *= s; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator/(Jet a, cplx s) { return a *= 1.0 / s; }
  friend Jet operator/(Jet a, double s) { return a *= 1.0 / s; }
  friend Jet operator+(Jet a, cplx s) { return a += s; }
  friend Jet operator+(cplx s, Jet a) { return a += s; }
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator+(double s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, cplx s) { return a += -s; }
  friend Jet operator-(Jet a, double s) { return a += -s; }
  friend Jet operator-(cplx s, const Jet& a) { return (-a) + s; }
  friend Jet operator-(double s, const Jet& a) { return (-a) + s; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    r.valid_ = std::min(a.valid_, b.valid_);
    for (int k = 0; k < r.valid_; ++k) {
      cplx s = 0.0;
      for (int j = 0; j <= k; ++j) s += a.c_[j] * b.c_[k - j];
      r.c_[k] = s;
    }
    return r;
  }

  friend Jet operator/(const Jet& a, const Jet& b) {
    Jet r;
    r.valid_ = std::min(a.valid_, b.valid_);
    for (int k = 0; k < r.valid_; ++k) {
      cplx s = a.c_[k];
      for (int j = 1; j <= k; ++j) s -= b.c_[j] * r.c_[k - j];
      r.c_[k] = s / b.c_[0];
    }
    return r;
  }
  friend Jet operator/(cplx s, const Jet& b) { return Jet(s, b.valid_) / b; }
  friend Jet operator/(double s, const Jet& b) { return Jet(s, b.valid_) / b; }

 private:
  std::array<cplx, capacity> c_;
  int valid_ = capacity;
};

inline Jet exp(const Jet& a) {
  Jet r;
  r = Jet(std::exp(a[0]), a.valid());
  for (int k = 1; k < a.valid(); ++k) {
    cplx s = 0.0;
    for (int j = 1; j <= k; ++j) s += double(j) * a[j] * r[k - j];
    r[k] = s / double(k);
  }
  return r;
}

// Principal branch at the expansion point.
inline Jet log(const Jet& a) {
  Jet r(std::log(a[0]), a.valid());
  for (int k = 1; k < a.valid(); ++k) {
    cplx s = 0.0;
    for (int j = 1; j < k; ++j) s += double(j) * r[j] * a[k - j];
    r[k] = (a[k] - s / double(k)) / a[0];
  }
  return r;
}

inline void sincos(const Jet& a, Jet& s, Jet& c) {
  s = Jet(std::sin(a[0]), a.valid());
  c = Jet(std::cos(a[0]), a.valid());
  for (int k = 1; k < a.valid(); ++k) {
    cplx ss = 0.0, cc = 0.0;
    for (int j = 1; j <= k; ++j) {
      ss += double(j) * a[j] * c[k - j];
      cc += double(j) * a[j] * s[k - j];
    }
    s[k] = ss / double(k);
    c[k] = -cc / double(k);
  }
}

inline Jet sin(const Jet& a) {
  Jet s, c;
  sincos(a, s, c);
  return s;
}
inline Jet cos(const Jet& a) {
  Jet s, c;
  sincos(a, s, c);
  return c;
}
inline Jet tan(const Jet& a) {
  Jet s, c;
  sincos(a, s, c);
  return s / c;
}
inline Jet cot(const Jet& a) {
  Jet s, c;
  sincos(a, s, c);
  return c / s;
}
inline Jet csc(const Jet& a) { return 1.0 / sin(a); }
inline Jet sec(const Jet& a) { return 1.0 / cos(a); }

inline Jet sinh(const Jet& a) { return (exp(a) - exp(-a)) * 0.5; }
inline Jet cosh(const Jet& a) { return (exp(a) + exp(-a)) * 0.5; }

// Principal branch a^p = exp(p log a).
inline Jet pow(const Jet& a, cplx p) { return exp(log(a) * p); }
inline Jet sqrt(const Jet& a) { return pow(a, 0.5); }

inline Jet square(const Jet& a) { return a * a; }

using JetFn = std::function<Jet(cplx)>;

}  // namespace deformed_spectra
