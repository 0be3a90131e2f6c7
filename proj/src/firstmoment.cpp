#include "hstab/firstmoment.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "hstab/errors.hpp"
#include "hstab/solve1d.hpp"
#include "hstab/specfun.hpp"

namespace hstab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

// Bracket expansion for theta stops here; beyond it the slope loses too many
// digits to cancellation between 2 theta and L'.
constexpr double kThetaFar = 1e4;

void check_fraction(double r) {
  if (!(r > 0.0 && r <= 1.0)) throw ParameterError("fraction r must lie in (0, 1], got " + std::to_string(r));
}

double closed_coefficient(Convention conv) { return conv == Convention::printed_closed_form ? 3.0 : 1.0; }

// d/dx of the density at fixed h, r (envelope theorem for the inner sup).
double w_x_slope(double x, double h, double r, Convention conv) {
  if (conv == Convention::printed_closed_form) return -2.0 * x + 3.0 * log1perf_deriv(3.0 * x - h * kInvSqrt2);
  const auto ti = theta_inner(x, h, r);
  if (!ti.bounded) return kInf;
  const double u = 2.0 * x + ti.theta - h * kInvSqrt2;
  return -4.0 * x + 2.0 * (2.0 * r - 1.0) * log1perf_deriv(u);
}

}  // namespace

std::string_view convention_tag(Convention c) {
  switch (c) {
    case Convention::calibrated:
      return "calibrated:entropy=(1-r)log2,theta*=-x,closed=L(x-h/sqrt2)";
    case Convention::printed_closed_form:
      return "printed_closed_form:closed=L(3x-h/sqrt2)";
    case Convention::printed_log_two:
      return "printed_log_two:entropy=H(r)-r*log2";
  }
  return "unknown";
}

double binary_entropy(double r) {
  if (r <= 0.0 || r >= 1.0) return 0.0;
  return -r * std::log(r) - (1.0 - r) * std::log1p(-r);
}

ThetaInner theta_inner(double x, double h, double r) {
  check_fraction(r);
  const double k = 2.0 * r - 1.0;
  const double c = 2.0 * x - h * kInvSqrt2;
  if (k == 0.0) return {0.0, 0.0, true};

  auto objective = [&](double th) { return -th * th - k * log1perf(th + c); };
  auto slope = [&](double th) { return -2.0 * th - k * log1perf_deriv(th + c); };
  auto slope_and_curv = [&](double th) {
    const double u = th + c;
    const double kd = log1perf_deriv(u);
    return std::pair{-2.0 * th - k * kd, -2.0 + k * kd * (2.0 * u + kd)};
  };

  // The objective is concave, so its slope is decreasing; collect every
  // (+, -) sign change among the starts and keep the best stationary point.
  std::array<double, 5> starts{-4.0, -1.0, 0.0, 1.0, 4.0};
  std::array<double, 5> slopes{};
  for (std::size_t i = 0; i < starts.size(); ++i) slopes[i] = slope(starts[i]);

  auto polish = [&](double lo, double hi) {
    const double th = solve1d::safeguarded_newton(slope_and_curv, lo, hi, 1e-12);
    return ThetaInner{th, objective(th), true};
  };

  bool found = false;
  ThetaInner best{};
  auto consider = [&](ThetaInner cand) {
    if (!found || cand.value > best.value + 1e-10 ||
        (std::abs(cand.value - best.value) <= 1e-10 && std::abs(cand.theta) < std::abs(best.theta))) {
      best = cand;
      found = true;
    }
  };
  for (std::size_t i = 0; i + 1 < starts.size(); ++i)
    if (slopes[i] > 0.0 && slopes[i + 1] <= 0.0) consider(polish(starts[i], starts[i + 1]));
  if (found) return best;

  if (slopes.front() <= 0.0) {
    // Root lies below -4: expand downward.
    double hi = starts.front();
    for (double lo = 2.0 * hi; -lo <= kThetaFar * 2.0; hi = lo, lo *= 2.0) {
      const double cl = std::max(lo, -kThetaFar);
      if (slope(cl) > 0.0) return polish(cl, hi);
      if (cl == -kThetaFar) break;
    }
  } else {
    double lo = starts.back();
    for (double hi = 2.0 * lo; hi <= kThetaFar * 2.0; lo = hi, hi *= 2.0) {
      const double ch = std::min(hi, kThetaFar);
      if (slope(ch) <= 0.0) return polish(lo, ch);
      if (ch == kThetaFar) break;
    }
  }
  // For r = 1 the supremum is +inf when 2x <= h/sqrt2 (and astronomically
  // far out when 2x - h/sqrt2 is tiny but positive).
  if (k == 1.0) return {-kInf, kInf, false};
  throw SolverError("theta_inner: could not bracket the stationary point (x=" + std::to_string(x) +
                    ", h=" + std::to_string(h) + ", r=" + std::to_string(r) + ")");
}

double w_x(double x, double h, double r, Convention conv) {
  check_fraction(r);
  if (conv == Convention::printed_closed_form) {
    if (r != 1.0) throw ParameterError("printed_closed_form convention is defined for r = 1 only");
    return -x * x + log1perf(3.0 * x - h * kInvSqrt2);
  }
  const auto ti = theta_inner(x, h, r);
  if (!ti.bounded) return -kInf;
  const double constant = conv == Convention::calibrated ? (1.0 - r) * std::numbers::ln2 : -r * std::numbers::ln2;
  return binary_entropy(r) + constant - 2.0 * x * x - ti.value;
}

FirstMomentSaddle w_sup(double h, double r, Convention conv) {
  check_fraction(r);
  auto f = [&](double x) { return w_x(x, h, r, conv); };

  // Coarse scan of a width-2 window, shifted until the best point is interior.
  constexpr double kStep = 0.05;
  constexpr int kPoints = 41;
  double start = (r == 1.0 && h > 0.0) ? h * kInvSqrt2 / (conv == Convention::printed_closed_form ? 3.0 : 2.0) : 0.0;
  double best_x = start, best_v = -kInf;
  for (int shift = 0; shift < 40; ++shift) {
    best_v = -kInf;
    int best_i = 0;
    for (int i = 0; i < kPoints; ++i) {
      const double v = f(start + kStep * i);
      if (v > best_v) {
        best_v = v;
        best_i = i;
      }
    }
    best_x = start + kStep * best_i;
    if (best_i == kPoints - 1 || best_v == -kInf) {
      start += 2.0;
    } else if (best_i == 0 && shift == 0 && !(r == 1.0 && h > 0.0)) {
      start -= 2.0;
    } else {
      break;
    }
  }
  if (best_v == -kInf)
    throw SolverError("w_sup: no finite density found up to x=" + std::to_string(start));

  auto mx = solve1d::golden_max(f, best_x - kStep, best_x + kStep, 1e-9);
  double x = mx.x;
  // Golden section only pins x to ~sqrt(eps); finish on the slope.
  auto slope = [&](double xx) { return w_x_slope(xx, h, r, conv); };
  const double delta = 1e-6;
  const double slo = slope(x - delta), shi = slope(x + delta);
  if (std::isfinite(slo) && std::isfinite(shi) && (slo > 0) != (shi > 0))
    x = solve1d::bracketed_root(slope, x - delta, x + delta, 1e-15);

  FirstMomentSaddle out;
  out.x_star = x;
  out.value = f(x);
  out.convention = conv;
  out.upper_bound_only = r < 1.0;
  if (conv == Convention::printed_closed_form) {
    out.theta_star = 2.0 * x;
    out.residuals = {slope(x), 0.0};
  } else {
    const auto ti = theta_inner(x, h, r);
    out.theta_star = ti.theta;
    const double kval = (2.0 * r - 1.0) * log1perf_deriv(2.0 * x + ti.theta - h * kInvSqrt2);
    out.residuals = {2.0 * x - kval, 2.0 * ti.theta + kval};
  }
  return out;
}

double w_closed(double h, Convention conv) {
  const double k = closed_coefficient(conv);
  const double shift = h * kInvSqrt2;
  auto g = [&](double x) { return -x * x + log1perf(k * x - shift); };
  auto slope = [&](double x) { return -2.0 * x + k * log1perf_deriv(k * x - shift); };
  // g is concave: walk outward until the slope changes sign.
  double lo = -1.0, hi = 1.0;
  while (slope(lo) <= 0.0) lo *= 2.0;
  while (slope(hi) > 0.0) hi *= 2.0;
  const double x = solve1d::bracketed_root(slope, lo, hi, 1e-15);
  return g(x);
}

double h_star(Convention conv) {
  auto w = [&](double h) {
    return conv == Convention::printed_closed_form ? w_closed(h, conv) : w_sup(h, 1.0, conv).value;
  };
  if (!(w(0.0) > 0.0) || !(w(1.0) < 0.0))
    throw SolverError("h_star: density does not change sign on [0, 1] under " + std::string(convention_tag(conv)));
  return solve1d::bisect(w, 0.0, 1.0, 1e-10);
}

double w_energy(double E, double h, Convention conv) { return w_x(-E * kInvSqrt2, h, 1.0, conv); }

EnergyRoots energy_roots(double h, Convention conv) {
  const auto saddle = w_sup(h, 1.0, conv);
  if (!(saddle.value > 0.0))
    throw DomainError("energy_roots: no positive density at h=" + std::to_string(h) + " (h >= h*)");
  auto f = [&](double x) { return w_x(x, h, 1.0, conv); };
  const double xs = saddle.x_star;

  double lo = xs, step = 0.05;
  do {
    lo = xs - step;
    step *= 2.0;
  } while (f(lo) > 0.0);
  double hi = xs;
  step = 0.05;
  do {
    hi = xs + step;
    step *= 2.0;
  } while (f(hi) > 0.0);

  const double x_small = solve1d::bisect(f, lo, xs, 1e-12);
  const double x_large = solve1d::bisect(f, xs, hi, 1e-12);
  return {-std::numbers::sqrt2 * x_large, -std::numbers::sqrt2 * x_small};
}

}  // namespace hstab
