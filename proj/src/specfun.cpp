#include "hstab/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace hstab {

namespace {

constexpr double kAsymptoticSwitch = 6.0;
const double kLogSqrtPi = 0.5 * std::log(std::numbers::pi);
const double kLogHalfPi = std::log(0.5 * std::numbers::pi);

// S(u) = sqrt(pi) u exp(u^2) erfc(u) = sum_k (-1)^k (2k-1)!! / (2u^2)^k, u >= 6.
// Summed to the smallest term; at u = 6 that term is far below 1e-17.
double erfc_asymptotic_sum(double u) {
  const double inv = 1.0 / (2.0 * u * u);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double next = -term * (2.0 * k - 1.0) * inv;
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace

double log1perf(double y) {
  if (std::isinf(y)) return y > 0 ? std::numbers::ln2 : -std::numeric_limits<double>::infinity();
  if (y >= 0.0) return std::numbers::ln2 + std::log1p(-0.5 * std::erfc(y));
  if (y >= -kAsymptoticSwitch) return std::log(std::erfc(-y));
  const double u = -y;
  return -u * u - std::log(u) - kLogSqrtPi + std::log(erfc_asymptotic_sum(u));
}

double log1perf_deriv(double y) {
  if (y < -kAsymptoticSwitch) {
    const double u = -y;
    return 2.0 * u / erfc_asymptotic_sum(u);
  }
  return std::exp(std::log(2.0) - kLogSqrtPi - y * y - log1perf(y));
}

LogQ log_qfun_derivs(double theta, double a1, double a2, const QuadratureSpec& quad) {
  if (!(a1 >= 0.0)) throw ParameterError("P/Q functions require a1 >= 0");
  const double m = theta + a2;
  const double root2 = std::numbers::sqrt2;

  // g(z) = -z^2/2 + log(1 + erf((m - a1 z)/sqrt 2)) is decreasing on z >= 0,
  // so its peak is at z = 0 and exp(g - g0) is bounded by 1.
  const double g0 = log1perf(m / root2);
  auto integrand = [&](double z) {
    return std::exp(-0.5 * z * z + log1perf((m - a1 * z) / root2) - g0);
  };
  // g is concave, so exp(g - g0) <= exp(g'(0) z). When that decay is steep
  // the mass sits near 0 and the domain is cut where the bound reaches e^-40.
  const double decay = a1 / root2 * log1perf_deriv(m / root2);
  const double upper = decay * quad.tail_cutoff > 40.0 ? 40.0 / decay : quad.tail_cutoff;
  const auto res = integrate(integrand, 0.0, upper, quad);
  if (!(res.value > 0.0)) throw QuadratureError("log_qfun: non-positive integral");

  LogQ out;
  out.value = 0.5 * kLogHalfPi + g0 + std::log(res.value);

  // Q'(m) = int_0^inf exp(-z^2/2 - (a1 z - m)^2/2) dz has a closed form.
  const double s = 1.0 + a1 * a1;
  const double mu = a1 * m / s;
  const double log_dq = -m * m / (2.0 * s) + 0.5 * std::log(std::numbers::pi / (2.0 * s)) +
                        log1perf(mu * std::sqrt(0.5 * s));
  out.d1 = std::exp(log_dq - out.value);
  // Q'' = a1 exp(-m^2/2)/s - (m/s) Q'
  const double d2q_over_q = a1 / s * std::exp(-0.5 * m * m - out.value) - m / s * out.d1;
  out.d2 = d2q_over_q - out.d1 * out.d1;
  return out;
}

double log_qfun(double theta, double a1, double a2, const QuadratureSpec& quad) {
  return log_qfun_derivs(theta, a1, a2, quad).value;
}

double qfun(double theta, double a1, double a2, const QuadratureSpec& quad) {
  return std::exp(log_qfun(theta, a1, a2, quad));
}

double log_pfun(double theta, double a1, double a2, const QuadratureSpec& quad) {
  return 0.5 * theta * theta - std::log(std::numbers::pi) + log_qfun(theta, a1, a2, quad);
}

double pfun(double theta, double a1, double a2, const QuadratureSpec& quad) {
  const double lp = log_pfun(theta, a1, a2, quad);
  if (lp > std::log(std::numeric_limits<double>::max()))
    throw std::range_error("pfun: result exceeds double range; use log_pfun");
  return std::exp(lp);
}

}  // namespace hstab
