#include "hstab/secondmoment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "hstab/errors.hpp"
#include "hstab/firstmoment.hpp"
#include "hstab/solve1d.hpp"
#include "hstab/specfun.hpp"

namespace hstab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kThetaFloor = -1e6;

struct Factor {
  double weight;  // 2b or 2c
  double a1;
  double a2;
};

// The two log P factors of F at a given t.
std::array<Factor, 2> factors(double t, const OverlapQuery& q) {
  const double b = q.beta();
  const double c = 0.5 - b;
  return {Factor{2.0 * b, std::sqrt(c / b), t / std::pow(b, 1.5) - q.h / std::sqrt(2.0 * b)},
          Factor{2.0 * c, std::sqrt(b / c), (q.x - t) / std::pow(c, 1.5) - q.h / std::sqrt(2.0 * c)}};
}

double entropy_term(double b) {
  const double c = 0.5 - b;
  return -2.0 * b * std::log(b) - 2.0 * c * std::log(c);
}

double quadratic_term(double t, const OverlapQuery& q) {
  const double b = q.beta();
  const double c = 0.5 - b;
  return -t * t / (2.0 * b * b) - (q.x - t) * (q.x - t) / (2.0 * c * c);
}

// Solve the 3x3 system J dx = -r by Gaussian elimination with partial pivoting.
bool solve3(std::array<std::array<double, 3>, 3> J, std::array<double, 3> r, std::array<double, 3>& dx) {
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int row = col + 1; row < 3; ++row)
      if (std::abs(J[row][col]) > std::abs(J[piv][col])) piv = row;
    if (J[piv][col] == 0.0) return false;
    std::swap(J[piv], J[col]);
    std::swap(r[piv], r[col]);
    for (int row = col + 1; row < 3; ++row) {
      const double f = J[row][col] / J[col][col];
      for (int k = col; k < 3; ++k) J[row][k] -= f * J[col][k];
      r[row] -= f * r[col];
    }
  }
  for (int row = 2; row >= 0; --row) {
    double s = -r[row];
    for (int k = row + 1; k < 3; ++k) s -= J[row][k] * dx[k];
    dx[row] = s / J[row][row];
  }
  return std::isfinite(dx[0]) && std::isfinite(dx[1]) && std::isfinite(dx[2]);
}

double max_abs(const std::array<double, 3>& r) {
  return std::max({std::abs(r[0]), std::abs(r[1]), std::abs(r[2])});
}

}  // namespace

OverlapQuery clamped(OverlapQuery q) {
  if (!std::isfinite(q.x) || !std::isfinite(q.h)) throw ParameterError("overlap query: x and h must be finite");
  if (!(std::abs(q.omega) <= 1.0)) throw ParameterError("overlap omega must lie in [-1, 1]");
  q.omega = std::clamp(q.omega, -1.0 + kOmegaClamp, 1.0 - kOmegaClamp);
  return q;
}

std::array<double, 2> t_range(const OverlapQuery& q) {
  const double b = q.beta();
  return {q.h * b / std::numbers::sqrt2, q.x - q.h * (0.5 - b) / std::numbers::sqrt2};
}

ThetaMin minimize_log_pfun(double a1, double a2, const QuadratureSpec& quad) {
  if (!(a2 > 0.0)) return {-kInf, -kInf};
  auto slope = [&](double th) {
    const auto lq = log_qfun_derivs(th, a1, a2, quad);
    return std::pair{th + lq.d1, 1.0 + lq.d2};
  };
  // The slope is positive at 0 (Q' > 0), so the minimizer is negative.
  double lo = -1.0;
  while (slope(lo).first >= 0.0) {
    lo *= 2.0;
    if (lo < kThetaFloor) return {-kInf, -kInf};
  }
  const double th = solve1d::safeguarded_newton(slope, lo, 0.0, 1e-13);
  return {th, log_pfun(th, a1, a2, quad)};
}

InnerMin inner_min(double t, const OverlapQuery& q, const QuadratureSpec& quad) {
  const auto fs = factors(t, q);
  const auto m1 = minimize_log_pfun(fs[0].a1, fs[0].a2, quad);
  const auto m2 = minimize_log_pfun(fs[1].a1, fs[1].a2, quad);
  double g = -kInf;
  if (std::isfinite(m1.value) && std::isfinite(m2.value))
    g = quadratic_term(t, q) + fs[0].weight * m1.value + fs[1].weight * m2.value;
  return {m1.theta, m2.theta, g};
}

double f_objective(double t, double theta1, double theta2, const OverlapQuery& q, const QuadratureSpec& quad) {
  const auto fs = factors(t, q);
  return quadratic_term(t, q) + fs[0].weight * log_pfun(theta1, fs[0].a1, fs[0].a2, quad) +
         fs[1].weight * log_pfun(theta2, fs[1].a1, fs[1].a2, quad);
}

std::array<double, 3> stationarity_residuals(double t, double theta1, double theta2, const OverlapQuery& q,
                                             const QuadratureSpec& quad) {
  const double b = q.beta();
  const double c = 0.5 - b;
  const auto fs = factors(t, q);
  const double d1 = log_qfun_derivs(theta1, fs[0].a1, fs[0].a2, quad).d1;
  const double d2 = log_qfun_derivs(theta2, fs[1].a1, fs[1].a2, quad).d1;
  return {-t / (b * b) + (q.x - t) / (c * c) - 2.0 * theta1 / std::sqrt(b) + 2.0 * theta2 / std::sqrt(c),
          theta1 + d1, theta2 + d2};
}

std::string_view method_tag(SaddleMethod m) { return m == SaddleMethod::newton ? "newton" : "max_min"; }

SecondMomentSaddle w_overlap(const OverlapQuery& query, const QuadratureSpec& quad) {
  const OverlapQuery q = clamped(query);
  const auto [lo, hi] = t_range(q);
  if (!(hi > lo))
    throw DomainError("w_overlap: empty t-interval for x=" + std::to_string(q.x) + ", omega=" +
                      std::to_string(q.omega) + ", h=" + std::to_string(q.h));
  const double width = hi - lo;
  auto G = [&](double t) { return inner_min(t, q, quad).G; };

  // G is strictly concave and -inf at both ends; a short scan keeps the
  // golden section away from the infinite plateaus.
  constexpr int kScan = 16;
  int best = 1;
  double best_v = -kInf;
  for (int i = 1; i < kScan; ++i) {
    const double v = G(lo + width * i / kScan);
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  if (!std::isfinite(best_v)) throw SolverError("w_overlap: G is -inf across the t-interval");
  const auto mx = solve1d::golden_max(G, lo + width * (best - 1) / kScan, lo + width * (best + 1) / kScan,
                                      1e-7 * width);

  SecondMomentSaddle out;
  out.omega = q.omega;
  const auto inner = inner_min(mx.x, q, quad);
  double t = mx.x, th1 = inner.theta1, th2 = inner.theta2;
  auto resid = stationarity_residuals(t, th1, th2, q, quad);

  // Damped Newton with a forward-difference Jacobian (step 1e-6).
  bool newton_ok = false;
  {
    std::array<double, 3> v{t, th1, th2};
    auto r = resid;
    for (int it = 0; it < 40 && max_abs(r) > 1e-11; ++it) {
      std::array<std::array<double, 3>, 3> J{};
      for (int k = 0; k < 3; ++k) {
        auto vp = v;
        const double step = 1e-6 * std::max(1.0, std::abs(v[k]));
        vp[k] += step;
        const auto rp = stationarity_residuals(vp[0], vp[1], vp[2], q, quad);
        for (int row = 0; row < 3; ++row) J[row][k] = (rp[row] - r[row]) / step;
      }
      std::array<double, 3> dx{};
      if (!solve3(J, r, dx)) break;
      double lambda = 1.0;
      bool moved = false;
      for (int halve = 0; halve < 30; ++halve, lambda *= 0.5) {
        const std::array<double, 3> trial{v[0] + lambda * dx[0], v[1] + lambda * dx[1], v[2] + lambda * dx[2]};
        if (!(trial[0] > lo && trial[0] < hi)) continue;
        const auto rt = stationarity_residuals(trial[0], trial[1], trial[2], q, quad);
        if (max_abs(rt) < max_abs(r)) {
          v = trial;
          r = rt;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    const double fv = f_objective(v[0], v[1], v[2], q, quad);
    if (max_abs(r) < 1e-9 && std::abs(v[0] - t) < 1e-3 * width && fv >= mx.value - 1e-9) {
      t = v[0];
      th1 = v[1];
      th2 = v[2];
      resid = r;
      out.value = entropy_term(q.beta()) + fv;
      newton_ok = true;
    }
  }

  if (!newton_ok) {
    // Envelope slope dG/dt is the first residual at the inner optimum.
    auto slope = [&](double tt) {
      const auto in = inner_min(tt, q, quad);
      return stationarity_residuals(tt, in.theta1, in.theta2, q, quad)[0];
    };
    const double delta = std::max(1e-6 * width, 1e-12);
    const double a = std::max(lo + 0.5 * delta, t - delta), b = std::min(hi - 0.5 * delta, t + delta);
    const double sa = slope(a), sb = slope(b);
    if (std::isfinite(sa) && std::isfinite(sb) && (sa > 0) != (sb > 0)) t = solve1d::bracketed_root(slope, a, b, 1e-15);
    const auto in = inner_min(t, q, quad);
    th1 = in.theta1;
    th2 = in.theta2;
    resid = stationarity_residuals(t, th1, th2, q, quad);
    out.value = entropy_term(q.beta()) + in.G;
    out.method = SaddleMethod::max_min;
  }

  out.t_star = t;
  out.theta1_star = th1;
  out.theta2_star = th2;
  out.residuals = resid;
  out.on_boundary = (t - lo) < 1e-6 * width || (hi - t) < 1e-6 * width;
  return out;
}

OmegaScan scan_omega(double E, double h, const ECorOptions& opt) {
  const double x = -E / std::numbers::sqrt2;
  auto W = [&](double om) { return w_overlap({x, om, h}, opt.quad).value; };
  const double omax = 1.0 - kOmegaClamp;

  OmegaScan out;
  out.w_zero = W(0.0);
  double om = 0.0, best = out.w_zero;
  while (om + opt.omega_step <= omax) {
    const double v = W(om + opt.omega_step);
    if (!(v > best)) break;
    om += opt.omega_step;
    best = v;
  }
  double step = opt.omega_step;
  for (int pass = 0; pass < opt.refine_passes; ++pass) {
    step /= 10.0;
    for (double dir : {1.0, -1.0}) {
      for (int k = 0; k < 10; ++k) {
        const double cand = om + dir * step;
        if (cand < 0.0 || cand > omax) break;
        const double v = W(cand);
        if (!(v > best)) break;
        om = cand;
        best = v;
      }
    }
  }
  out.omega_argmax = om;
  out.w_max = best;
  return out;
}

bool correlated(double E, double h, const ECorOptions& opt) {
  const double x = -E / std::numbers::sqrt2;
  const double w0 = w_overlap({x, 0.0, h}, opt.quad).value;
  const double w1 = w_overlap({x, opt.omega_step, h}, opt.quad).value;
  return w1 > w0 + opt.threshold;
}

double e_cor(double h, const ECorOptions& opt) {
  const auto saddle = w_sup(h);
  if (!(saddle.value > 0.0)) throw DomainError("e_cor: requires h < h* (got h=" + std::to_string(h) + ")");
  const double e_top = -std::numbers::sqrt2 * saddle.x_star;
  if (correlated(e_top, h, opt))
    throw SolverError("e_cor: omega = 0 is already unstable at the first-moment maximizer");
  double e_hi = e_top, e_lo = e_top - 0.05;
  while (!correlated(e_lo, h, opt)) {
    e_hi = e_lo;
    e_lo -= 0.05;
    if (e_lo < opt.e_floor) throw SolverError("e_cor: no correlation onset above E=" + std::to_string(opt.e_floor));
  }
  return solve1d::bisect_predicate([&](double E) { return correlated(E, h, opt); }, e_lo, e_hi, opt.e_tol);
}

double h_cor(const ECorOptions& opt, double h_tol) {
  auto gap = [&](double h) { return e_cor(h, opt) - energy_roots(h).e_min; };
  const double hs = h_star();
  double lo = 0.0, hi = hs - 0.01;
  if (!(gap(lo) > 0.0)) throw SolverError("h_cor: E_cor(0) is not above E_min(0)");
  if (!(gap(hi) < 0.0)) throw SolverError("h_cor: E_cor does not cross E_min below h*");
  return solve1d::bisect_predicate([&](double h) { return gap(h) > 0.0; }, lo, hi, h_tol);
}

}  // namespace hstab
