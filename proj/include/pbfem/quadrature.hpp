// Gauss-Legendre quadrature and Gauss-Lobatto node sets on the reference
// interval [0,1] and reference square [0,1]^2.
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace pbfem {

// 1D Gauss-Legendre rule with n points, exact for polynomials of degree
// 2n-1. Points and weights are for the interval [0,1].
struct QuadRule1D {
  std::vector<double> pts;
  std::vector<double> wts;
  int size() const { return static_cast<int>(pts.size()); }
};

// Tensor rule on [0,1]^2, x-index fastest.
struct QuadRule {
  std::vector<double> x, z, w;
  int size() const { return static_cast<int>(w.size()); }
};

namespace detail {

// Legendre polynomial P_n and derivative at x in [-1,1] by recurrence.
inline void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  if (n == 0) { p = p0; dp = 0.0; return; }
  for (int j = 2; j <= n; ++j) {
    const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1.0);
}

}  // namespace detail

inline QuadRule1D gauss_legendre_1d(int n) {
  if (n < 1 || n > 10) throw std::invalid_argument("gauss_legendre: n out of range [1,10]");
  QuadRule1D rule;
  rule.pts.resize(n);
  rule.wts.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev initial guess, Newton refinement on [-1,1].
    double x = -std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double p, dp;
    for (int it = 0; it < 100; ++it) {
      detail::legendre(n, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    detail::legendre(n, x, p, dp);
    rule.pts[i] = 0.5 * (x + 1.0);
    rule.wts[i] = 1.0 / ((1.0 - x * x) * dp * dp);  // [0,1] weight = [-1,1] weight / 2
  }
  return rule;
}

// Gauss-Lobatto points on [0,1] (n >= 2 points, including both endpoints).
// Interior points are the roots of P'_{n-1}. Used for node placement only.
inline std::vector<double> gauss_lobatto_points(int n) {
  if (n < 2 || n > 12) throw std::invalid_argument("gauss_lobatto_points: n out of range [2,12]");
  std::vector<double> pts(n);
  pts[0] = 0.0;
  pts[n - 1] = 1.0;
  for (int i = 1; i < n - 1; ++i) {
    double x = -std::cos(M_PI * i / (n - 1));
    for (int it = 0; it < 100; ++it) {
      // Newton on f = P'_{n-1}; f' from the Legendre ODE:
      // (1-x^2) P''_{n-1} = 2x P'_{n-1} - m(m+1) P_{n-1}, m = n-1.
      double p, dp;
      detail::legendre(n - 1, x, p, dp);
      const double m = n - 1.0;
      const double ddp = (2.0 * x * dp - m * (m + 1.0) * p) / (1.0 - x * x);
      const double dx = dp / ddp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    pts[i] = 0.5 * (x + 1.0);
  }
  return pts;
}

inline QuadRule tensor_rule(const QuadRule1D& rx, const QuadRule1D& rz) {
  QuadRule rule;
  const int n = rx.size() * rz.size();
  rule.x.resize(n);
  rule.z.resize(n);
  rule.w.resize(n);
  int q = 0;
  for (int qz = 0; qz < rz.size(); ++qz)
    for (int qx = 0; qx < rx.size(); ++qx, ++q) {
      rule.x[q] = rx.pts[qx];
      rule.z[q] = rz.pts[qz];
      rule.w[q] = rx.wts[qx] * rz.wts[qz];
    }
  return rule;
}

// n-point rule per direction; dim = 1 gives the interval rule embedded with
// z = 0 and is mainly a convenience for tests.
inline QuadRule gauss_legendre(int n, int dim) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("gauss_legendre: dim must be 1 or 2");
  const QuadRule1D r1 = gauss_legendre_1d(n);
  if (dim == 1) {
    QuadRule rule;
    rule.x = r1.pts;
    rule.z.assign(r1.size(), 0.0);
    rule.w = r1.wts;
    return rule;
  }
  return tensor_rule(r1, r1);
}

}  // namespace pbfem
