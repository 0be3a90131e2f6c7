#pragma once

#include <array>
#include <string_view>

namespace hstab {

/// Constant conventions for the first-moment entropy density.
///
/// The density formula admits several readings that disagree numerically;
/// each enumerator is one of them. `calibrated` is the reading that
/// reproduces every reference anchor (w(0), h*, E_min(0), E_max(0) and the
/// W(x,0,h) = 2 w(x,h) link) and is what every public entry point uses by
/// default. See calibration.hpp for the audit that selects it.
enum class Convention {
  /// H(r) + (1-r) log 2 - 2x^2 - sup_theta(...); closed form -x^2 + L(x - h/sqrt2).
  calibrated,
  /// Closed form as printed: -x^2 + L(3x - h/sqrt2), used pointwise in x.
  printed_closed_form,
  /// Variational form with the extra "-r log 2" constant.
  printed_log_two,
};

inline constexpr Convention kCalibratedConvention = Convention::calibrated;

std::string_view convention_tag(Convention c);

/// Optimizer of sup_theta(-theta^2 - (2r-1) L(2x + theta - h/sqrt2)),
/// L = log1perf. For r = 1 and 2x <= h/sqrt2 the supremum is +inf (no
/// configuration can meet the mean-field constraint); `bounded` is then false.
struct ThetaInner {
  double theta = 0.0;
  double value = 0.0;
  bool bounded = true;
};

ThetaInner theta_inner(double x, double h, double r);

/// First-moment entropy density at fixed cut parameter x. For r < 1 this is
/// only an upper bound on the true density.
double w_x(double x, double h, double r = 1.0, Convention conv = kCalibratedConvention);

struct FirstMomentSaddle {
  double x_star = 0.0;
  double theta_star = 0.0;
  double value = 0.0;
  /// Stationarity residuals: 2x - (2r-1)K(u) and 2 theta + (2r-1)K(u).
  std::array<double, 2> residuals{};
  Convention convention = kCalibratedConvention;
  bool upper_bound_only = false;  // r < 1
};

FirstMomentSaddle w_sup(double h, double r = 1.0, Convention conv = kCalibratedConvention);

/// sup_x(-x^2 + L(k x - h/sqrt2)) with k = 1 (calibrated) or 3 (printed).
double w_closed(double h, Convention conv = kCalibratedConvention);

/// Root of h -> sup_x w(x, h, 1) by bisection on [0, 1].
double h_star(Convention conv = kCalibratedConvention);

/// w'(E, h) = w(-E/sqrt2, h, 1).
double w_energy(double E, double h, Convention conv = kCalibratedConvention);

struct EnergyRoots {
  double e_min = 0.0;
  double e_max = 0.0;
};

/// Both roots of E -> w'(E, h). Throws DomainError when h >= h*.
EnergyRoots energy_roots(double h, Convention conv = kCalibratedConvention);

/// Binary entropy in nats, H(0) = H(1) = 0.
double binary_entropy(double r);

}  // namespace hstab
