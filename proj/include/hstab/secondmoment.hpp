#pragma once

#include <array>
#include <string_view>

#include "hstab/quadrature.hpp"

namespace hstab {

/// Overlaps with |omega| above 1 - kOmegaClamp are pulled back to the clamp;
/// the t-exponents (1/2 - beta)^{-3/2} blow up at the endpoints.
inline constexpr double kOmegaClamp = 1e-3;

struct OverlapQuery {
  double x = 0.0;
  double omega = 0.0;
  double h = 0.0;

  double beta() const { return 0.25 * (omega + 1.0); }
};

/// Clamp omega into [-1 + kOmegaClamp, 1 - kOmegaClamp]; |omega| > 1 throws.
OverlapQuery clamped(OverlapQuery q);

/// Admissible t-interval [h beta/sqrt2, x - h(1/2 - beta)/sqrt2].
std::array<double, 2> t_range(const OverlapQuery& q);

/// Minimizer of theta -> log P(theta, a1, a2). The problem is convex; for
/// a2 <= 0 the infimum is -inf and `value` is -inf.
struct ThetaMin {
  double theta = 0.0;
  double value = 0.0;
};

ThetaMin minimize_log_pfun(double a1, double a2, const QuadratureSpec& quad = {});

struct InnerMin {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double G = 0.0;
};

/// G(t) = inf over (theta1, theta2) of F(t, theta1, theta2).
InnerMin inner_min(double t, const OverlapQuery& q, const QuadratureSpec& quad = {});

/// F(t, theta1, theta2) itself.
double f_objective(double t, double theta1, double theta2, const OverlapQuery& q, const QuadratureSpec& quad = {});

/// Stationarity residuals in (t, theta1, theta2):
///   -t/b^2 + (x-t)/c^2 - 2 theta1/sqrt(b) + 2 theta2/sqrt(c)
///   theta1 + Q'/Q at (a1, a2) of the first factor
///   theta2 + Q'/Q at (a1, a2) of the second factor
/// with b = beta, c = 1/2 - beta.
std::array<double, 3> stationarity_residuals(double t, double theta1, double theta2, const OverlapQuery& q,
                                             const QuadratureSpec& quad = {});

enum class SaddleMethod { max_min, newton };

std::string_view method_tag(SaddleMethod m);

struct SecondMomentSaddle {
  double t_star = 0.0;
  double theta1_star = 0.0;
  double theta2_star = 0.0;
  double value = 0.0;  // W
  std::array<double, 3> residuals{};
  SaddleMethod method = SaddleMethod::newton;
  double omega = 0.0;        // after clamping
  bool on_boundary = false;  // optimum within 1e-6 (relative) of a t endpoint
};

/// W(x, omega, h): entropy of the overlap plus sup_t G(t). Golden-section on
/// t, then a damped Newton polish of the three stationarity equations.
SecondMomentSaddle w_overlap(const OverlapQuery& q, const QuadratureSpec& quad = {});

struct ECorOptions {
  double omega_step = 0.01;
  int refine_passes = 2;
  double threshold = 1e-7;
  double e_floor = -2.0;
  double e_tol = 1e-5;
  QuadratureSpec quad{};
};

/// Local argmax of omega -> W(-E/sqrt2, omega, h) on omega >= 0: walk the
/// grid outward from 0 while W increases, then refine around the stop.
struct OmegaScan {
  double omega_argmax = 0.0;
  double w_max = 0.0;
  double w_zero = 0.0;
};

OmegaScan scan_omega(double E, double h, const ECorOptions& opt = {});

/// True when omega = 0 is no longer a local maximizer at energy E: the first
/// grid step already beats W(omega = 0) by more than opt.threshold.
bool correlated(double E, double h, const ECorOptions& opt = {});

/// Infimum of energies at which omega = 0 still maximizes W locally.
double e_cor(double h, const ECorOptions& opt = {});

/// Root of h -> e_cor(h) - E_min(h) on [0, h*).
double h_cor(const ECorOptions& opt = {}, double h_tol = 1e-5);

}  // namespace hstab
