#pragma once

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hstab/errors.hpp"

namespace hstab {

/// Tolerances for the 1-D integrals behind P and Q.
///
/// `tail_cutoff` truncates the semi-infinite z-integral at Z; the dropped
/// Gaussian mass beyond 12 is below 1e-31.
struct QuadratureSpec {
  double abs_tol = 1e-11;
  double rel_tol = 1e-12;
  int max_subdivisions = 200;
  double tail_cutoff = 12.0;

  void validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
      throw ParameterError("QuadratureSpec: tolerances must be positive");
    if (max_subdivisions < 1)
      throw ParameterError("QuadratureSpec: max_subdivisions must be >= 1");
    if (!(tail_cutoff > 0.0))
      throw ParameterError("QuadratureSpec: tail_cutoff must be positive");
  }
};

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
  int subdivisions = 0;
};

namespace detail {

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(const F& f, double a, double b) {
  using Kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
  using Gauss = boost::math::quadrature::gauss<double, 7>;
  static const auto& xk = Kronrod::abscissa();
  static const auto& wk = Kronrod::weights();
  static const auto& wg = Gauss::weights();

  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  // Boost stores the non-negative half: xk[0] = 0, even indices are Gauss nodes.
  const double f0 = f(c);
  double kron = wk[0] * f0;
  double gauss = wg[0] * f0;
  for (std::size_t i = 1; i < xk.size(); ++i) {
    const double dx = h * xk[i];
    const double pair = f(c - dx) + f(c + dx);
    kron += wk[i] * pair;
    if (i % 2 == 0) gauss += wg[i / 2] * pair;
  }
  kron *= h;
  gauss *= h;
  return {a, b, kron, std::abs(kron - gauss)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) on [a, b]. Bisects the segment with
/// the largest error estimate until the total error is within
/// max(abs_tol, rel_tol * |I|). Throws QuadratureError when
/// max_subdivisions is exhausted first.
template <class F>
QuadResult integrate(const F& f, double a, double b, const QuadratureSpec& spec) {
  std::priority_queue<detail::Segment> heap;
  auto first = detail::gk15(f, a, b);
  double total = first.value;
  double err = first.error;
  heap.push(first);
  int subdivisions = 1;
  while (err > std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
    if (subdivisions >= spec.max_subdivisions)
      throw QuadratureError("adaptive quadrature: max_subdivisions exceeded");
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    auto left = detail::gk15(f, worst.a, mid);
    auto right = detail::gk15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++subdivisions;
    // Error sum drifts by rounding; recompute it occasionally.
    if (subdivisions % 32 == 0) {
      auto copy = heap;
      err = 0.0;
      total = 0.0;
      while (!copy.empty()) {
        err += copy.top().error;
        total += copy.top().value;
        copy.pop();
      }
    }
  }
  return {total, err, subdivisions};
}

}  // namespace hstab
