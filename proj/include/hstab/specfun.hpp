#pragma once

#include "hstab/quadrature.hpp"

namespace hstab {

/// log(1 + erf(y)) = log(erfc(-y)), accurate down to y = -1e150.
/// Uses the asymptotic expansion of erfc for y < -6.
double log1perf(double y);

/// d/dy log(1 + erf(y)) = (2/sqrt(pi)) exp(-y^2) / (1 + erf(y)).
double log1perf_deriv(double y);

// P and Q are the Gaussian wedge integrals
//   Q(theta, a1, a2) = int_0^inf int_{a1 z2}^inf exp(-((z1-theta-a2)^2 + z2^2)/2) dz1 dz2
//   P(theta, a1, a2) = exp(theta^2/2) Q / pi
// The z1 integral is done in closed form (an erfc); only z2 is integrated
// numerically. All routines require a1 >= 0.

/// log Q together with its first two derivatives in the shift m = theta + a2.
struct LogQ {
  double value = 0.0;  // log Q
  double d1 = 0.0;     // Q'/Q
  double d2 = 0.0;     // (log Q)''
};

LogQ log_qfun_derivs(double theta, double a1, double a2, const QuadratureSpec& quad = {});

double log_qfun(double theta, double a1, double a2, const QuadratureSpec& quad = {});
double qfun(double theta, double a1, double a2, const QuadratureSpec& quad = {});

/// Canonical evaluation path: log P = theta^2/2 - log(pi) + log Q.
double log_pfun(double theta, double a1, double a2, const QuadratureSpec& quad = {});

/// Linear-scale P. Throws std::range_error when P is not representable.
double pfun(double theta, double a1, double a2, const QuadratureSpec& quad = {});

}  // namespace hstab
