#pragma once

// Symmetric tridiagonal eigenproblems: Sturm-sequence bisection for the
// eigenvalues, inverse iteration for the vectors.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace deformed_spectra {

struct SymTridiag {
  std::vector<double> d;  // diagonal, size n
  std::vector<double> e;  // off-diagonal, size n-1
  size_t size() const { return d.size(); }
};

// Number of eigenvalues strictly below x.  Extended precision: for
// finite-difference matrices the norm grows like 1/h^2 while the wanted
// eigenvalues stay O(1), so double rounding would dominate.
inline size_t sturm_count(const SymTridiag& T, long double x) {
  const size_t n = T.size();
  size_t count = 0;
  long double q = (long double)T.d[0] - x;
  if (q < 0) ++count;
  for (size_t i = 1; i < n; ++i) {
    long double qq = q;
    if (std::fabs(qq) < 1e-300L) qq = -1e-300L;
    long double e = T.e[i - 1];
    q = (long double)T.d[i] - x - e * e / qq;
    if (q < 0) ++count;
  }
  return count;
}

inline std::pair<double, double> gershgorin(const SymTridiag& T) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  const size_t n = T.size();
  for (size_t i = 0; i < n; ++i) {
    double r = (i > 0 ? std::abs(T.e[i - 1]) : 0.0) + (i + 1 < n ? std::abs(T.e[i]) : 0.0);
    lo = std::min(lo, T.d[i] - r);
    hi = std::max(hi, T.d[i] + r);
  }
  return {lo, hi};
}

// k-th smallest eigenvalue (0-based) by bisection.
inline double tridiag_eigenvalue(const SymTridiag& T, size_t k, double lo_, double hi_) {
  long double lo = lo_, hi = hi_;
  for (int it = 0; it < 300; ++it) {
    long double mid = 0.5L * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (sturm_count(T, mid) > k)
      hi = mid;
    else
      lo = mid;
  }
  return double(0.5L * (lo + hi));
}

inline std::vector<double> tridiag_lowest(const SymTridiag& T, size_t count) {
  if (count > T.size()) throw std::invalid_argument("more eigenvalues requested than matrix size");
  auto [lo, hi] = gershgorin(T);
  double pad = 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
  std::vector<double> ev(count);
  for (size_t k = 0; k < count; ++k) {
    double l = (k > 0) ? ev[k - 1] - pad : lo - pad;
    ev[k] = tridiag_eigenvalue(T, k, std::max(l, lo - pad), hi + pad);
  }
  return ev;
}

// Solves (T - s) x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> tridiag_shift_solve(const SymTridiag& T, double s, std::vector<double> b) {
  const size_t n = T.size();
  // Rows hold three bands after pivoting: a[i] (diag), c[i] (super), f[i] (super-super).
  std::vector<double> dl(n, 0.0), dd(n), du(n, 0.0), du2(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    dd[i] = T.d[i] - s;
    if (i + 1 < n) {
      du[i] = T.e[i];
      dl[i + 1] = T.e[i];
    }
  }
  const double tiny = 1e-300;
  for (size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(dd[i]) >= std::abs(dl[i + 1])) {
      if (std::abs(dd[i]) < tiny) dd[i] = tiny;
      double m = dl[i + 1] / dd[i];
      dd[i + 1] -= m * du[i];
      if (i + 2 < n) du[i + 1] -= m * du2[i];
      b[i + 1] -= m * b[i];
    } else {
      double m = dd[i] / dl[i + 1];
      dd[i] = dl[i + 1];
      double t = dd[i + 1];
      dd[i + 1] = du[i] - m * t;
      if (i + 2 < n) {
        du2[i] = du[i + 1];
        du[i + 1] = -m * du2[i];
      }
      du[i] = t;
      std::swap(b[i], b[i + 1]);
      b[i + 1] -= m * b[i];
    }
  }
  if (std::abs(dd[n - 1]) < tiny) dd[n - 1] = tiny;
  std::vector<double> x(n);
  for (size_t ii = n; ii-- > 0;) {
    double v = b[ii];
    if (ii + 1 < n) v -= du[ii] * x[ii + 1];
    if (ii + 2 < n) v -= du2[ii] * x[ii + 2];
    x[ii] = v / dd[ii];
  }
  return x;
}

// Inverse iteration with Gram-Schmidt against previously found vectors of
// nearby eigenvalues.
inline std::vector<std::vector<double>> tridiag_vectors(const SymTridiag& T, const std::vector<double>& ev) {
  const size_t n = T.size();
  std::vector<std::vector<double>> vecs;
  double scale = 0.0;
  for (double v : T.d) scale = std::max(scale, std::abs(v));
  for (size_t k = 0; k < ev.size(); ++k) {
    std::vector<double> x(n);
    for (size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.1 * std::sin(0.7 * double(i) + double(k));
    double shift = ev[k] + 1e-14 * std::max(1.0, scale);
    for (int it = 0; it < 4; ++it) {
      x = tridiag_shift_solve(T, shift, x);
      for (size_t j = 0; j < k; ++j) {
        if (std::abs(ev[j] - ev[k]) > 1e-6 * std::max(1.0, std::abs(ev[k]))) continue;
        double p = std::inner_product(x.begin(), x.end(), vecs[j].begin(), 0.0);
        for (size_t i = 0; i < n; ++i) x[i] -= p * vecs[j][i];
      }
      double nrm = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
      for (auto& v : x) v /= nrm;
    }
    vecs.push_back(std::move(x));
  }
  return vecs;
}

}  // namespace deformed_spectra
