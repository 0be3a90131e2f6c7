#include "hstab/calibration.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hstab/secondmoment.hpp"
#include "hstab/solve1d.hpp"

namespace hstab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class F>
double or_nan(F&& f) {
  try {
    return f();
  } catch (const std::exception&) {
    return kNaN;
  }
}

bool near(double v, double target, double tol) { return std::abs(v - target) <= tol; }

}  // namespace

CalibrationReport calibration_audit() {
  CalibrationReport rep;
  constexpr double kLinkX = 0.4, kLinkH = 0.1;
  const double w_link = w_overlap({kLinkX, 0.0, kLinkH}).value;

  for (Convention c : {Convention::calibrated, Convention::printed_closed_form, Convention::printed_log_two}) {
    ConventionAudit row;
    row.convention = c;
    row.tag = std::string(convention_tag(c));
    row.w0 = or_nan([&] { return c == Convention::printed_closed_form ? w_closed(0.0, c) : w_sup(0.0, 1.0, c).value; });
    row.h_star = or_nan([&] { return h_star(c); });
    row.e_min0 = or_nan([&] { return energy_roots(0.0, c).e_min; });
    row.e_max0 = or_nan([&] { return energy_roots(0.0, c).e_max; });
    row.link_gap = std::abs(w_link - 2.0 * w_x(kLinkX, kLinkH, 1.0, c));

    row.w0_ok = near(row.w0, 0.1992, 5e-4);
    row.h_star_ok = near(row.h_star, 0.3513, 5e-4);
    row.e_min_ok = near(row.e_min0, -0.7915, 1e-3);
    row.e_max_ok = near(row.e_max0, -0.2865, 1e-3);
    row.link_ok = row.link_gap <= 1e-6;
    rep.rows.push_back(row);
  }

  bool found = false;
  for (const auto& row : rep.rows)
    if (row.all_ok() && !found) {
      rep.selected = row.convention;
      found = true;
    }
  if (!found) throw SolverError("calibration_audit: no convention reproduces every anchor");

  // Does the printed closed form share h* with the variational density?
  rep.closed_form_root = or_nan([] {
    auto w = [](double h) { return w_closed(h, Convention::printed_closed_form); };
    return solve1d::bisect(w, 0.0, 1.0, 1e-10);
  });
  rep.closed_and_variational_share_root =
      std::isfinite(rep.closed_form_root) && std::abs(rep.closed_form_root - h_star()) < 1e-4;
  return rep;
}

}  // namespace hstab
