#pragma once

// Small 1-D solvers shared by the moment computations. All are deterministic
// and allocation-free.

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>

#include <boost/math/tools/roots.hpp>

#include "hstab/errors.hpp"

namespace hstab::solve1d {

/// Bisection on a sign change of f over [lo, hi]; stops when the bracket is
/// narrower than xtol. f(lo) and f(hi) must have opposite signs.
template <class F>
double bisect(const F& f, double lo, double hi, double xtol) {
  double flo = f(lo);
  const double fhi = f(hi);
  if ((flo > 0) == (fhi > 0)) throw SolverError("bisect: interval does not bracket a root");
  while (hi - lo > xtol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Bisection on a predicate that is true at lo and false at hi. Returns the
/// midpoint of the final bracket.
template <class Pred>
double bisect_predicate(const Pred& pred, double lo, double hi, double xtol) {
  while (std::abs(hi - lo) > xtol) {
    const double mid = 0.5 * (lo + hi);
    if (pred(mid))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct MaxResult {
  double x;
  double value;
};

/// Golden-section search for the maximum of a unimodal f on [lo, hi].
template <class F>
MaxResult golden_max(const F& f, double lo, double hi, double xtol) {
  const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > xtol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? MaxResult{c, fc} : MaxResult{d, fd};
}

/// TOMS 748 root polish inside a known bracket.
template <class F>
double bracketed_root(const F& f, double lo, double hi, double xtol, std::uintmax_t max_iter = 200) {
  auto tol = [xtol](double a, double b) { return std::abs(b - a) <= xtol; };
  std::uintmax_t iters = max_iter;
  const double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) throw SolverError("bracketed_root: no sign change");
  auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  if (iters >= max_iter) throw SolverError("bracketed_root: iteration limit");
  return 0.5 * (a + b);
}

/// Safeguarded Newton for a decreasing-or-increasing f with derivative df.
/// Requires a sign-change bracket [lo, hi]; falls back to bisection whenever
/// the Newton step leaves the bracket or stalls.
template <class FdF>
double safeguarded_newton(const FdF& fdf, double lo, double hi, double ftol, int max_iter = 200) {
  auto [flo, dlo] = fdf(lo);
  auto [fhi, dhi] = fdf(hi);
  (void)dlo;
  (void)dhi;
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) throw SolverError("safeguarded_newton: no sign change");
  const bool rising = fhi > 0;
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < max_iter; ++it) {
    auto [fx, dfx] = fdf(x);
    if (std::abs(fx) <= ftol) return x;
    if ((fx > 0) == rising)
      hi = x;
    else
      lo = x;
    double next = x - fx / dfx;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (next == x || hi - lo < 4 * std::numeric_limits<double>::epsilon() * std::abs(x)) return x;
    x = next;
  }
  throw SolverError("safeguarded_newton: iteration limit");
}

}  // namespace hstab::solve1d
