#pragma once

// Independent reference computations shared by the unit and acceptance tests.
// Nothing here calls into the library's numerical code.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

namespace brute {

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton on P_n.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      const double dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) {
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        break;
      }
      w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    x[i] = z;
  }
  return {x, w};
}

/// Composite Gauss-Legendre over [a, b] with panels of width <= h.
inline double integrate(const std::function<double(double)>& f, double a, double b, double h = 0.5, int order = 20) {
  static const auto gl = gauss_legendre(20);
  const auto& [x, w] = order == 20 ? gl : gauss_legendre(order);
  if (b <= a) return 0.0;
  const int panels = static_cast<int>(std::ceil((b - a) / h));
  const double step = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * step, c = lo + 0.5 * step;
    for (std::size_t k = 0; k < x.size(); ++k) total += w[k] * 0.5 * step * f(c + 0.5 * step * x[k]);
  }
  return total;
}

/// Q(theta, a1, a2) as a plain 2-D tensor quadrature of the Gaussian over
/// {z2 >= 0, z1 >= a1 z2}, both directions truncated 14 sigma past the mass.
inline double q2d(double theta, double a1, double a2) {
  const double m = theta + a2;
  return integrate(
      [&](double z2) {
        const double lo = a1 * z2;
        const double hi = std::max(lo, m) + 14.0;
        return std::exp(-0.5 * z2 * z2) *
               integrate([&](double z1) { return std::exp(-0.5 * (z1 - m) * (z1 - m)); }, lo, hi);
      },
      0.0, 14.0);
}

inline double p2d(double theta, double a1, double a2) {
  return std::exp(0.5 * theta * theta) / std::numbers::pi * q2d(theta, a1, a2);
}

/// Dense grid maximum of f on [lo, hi] with the given step.
inline std::pair<double, double> grid_max(const std::function<double(double)>& f, double lo, double hi,
                                          double step) {
  double best_x = lo, best = f(lo);
  const auto count = static_cast<long long>(std::llround((hi - lo) / step));
  for (long long k = 1; k <= count; ++k) {
    const double x = lo + k * step;
    const double v = f(x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  return {best_x, best};
}

}  // namespace brute
