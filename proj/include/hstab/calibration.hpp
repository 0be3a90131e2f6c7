#pragma once

#include <string>
#include <vector>

#include "hstab/firstmoment.hpp"

namespace hstab {

/// One row of the convention audit. Anchors that could not be computed
/// under a convention (no sign change, no roots) are NaN and fail.
struct ConventionAudit {
  Convention convention = kCalibratedConvention;
  std::string tag;
  double w0 = 0.0;
  double h_star = 0.0;
  double e_min0 = 0.0;
  double e_max0 = 0.0;
  double link_gap = 0.0;  // |W(x, 0, h) - 2 w(x, h)| at x = 0.4, h = 0.1
  bool w0_ok = false;
  bool h_star_ok = false;
  bool e_min_ok = false;
  bool e_max_ok = false;
  bool link_ok = false;

  bool all_ok() const { return w0_ok && h_star_ok && e_min_ok && e_max_ok && link_ok; }
};

struct CalibrationReport {
  std::vector<ConventionAudit> rows;
  Convention selected = kCalibratedConvention;
  bool closed_and_variational_share_root = false;
  double closed_form_root = 0.0;  // NaN when the printed closed form has no root on [0, 1]
};

/// Evaluate every enumerated convention against the reference anchors
/// (w(0) = 0.1992, h* = 0.3513, E_min(0) = -0.7915, E_max(0) = -0.2865 and
/// the W(x, 0, h) = 2 w(x, h) link).
CalibrationReport calibration_audit();

}  // namespace hstab
