#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "../common/brute.hpp"
#include "hstab/calibration.hpp"
#include "hstab/errors.hpp"
#include "hstab/firstmoment.hpp"
#include "hstab/specfun.hpp"

using namespace hstab;

TEST_SUITE("firstmoment") {
  TEST_CASE("theta_inner stationarity at r = 1") {
    for (double x : {0.2, 0.3, 0.6}) {
      const auto t = theta_inner(x, 0.0, 1.0);
      REQUIRE(t.bounded);
      CHECK(std::abs(-2.0 * t.theta - log1perf_deriv(2.0 * x + t.theta)) < 1e-10);
    }
  }

  TEST_CASE("theta_inner at x = 0, h = 0 is unbounded under the calibrated objective") {
    const auto t = theta_inner(0.0, 0.0, 1.0);
    CHECK_FALSE(t.bounded);
    CHECK(std::isinf(t.value));
  }

  TEST_CASE("theta_inner degenerates at r = 1/2") {
    const auto t = theta_inner(0.4, 0.1, 0.5);
    CHECK(t.theta == 0.0);
    CHECK(t.value == 0.0);
  }

  TEST_CASE("theta_inner against a grid search") {
    const double x = 0.3;
    auto f = [&](double th) { return -th * th - log1perf(2.0 * x + th); };
    const auto [arg, best] = brute::grid_max(f, -10.0, 10.0, 1e-4);
    const auto t = theta_inner(x, 0.0, 1.0);
    CHECK(std::abs(t.value - best) < 1e-6);
    CHECK(std::abs(t.theta - arg) < 2e-4);
  }

  TEST_CASE("w_sup at h = 0 reproduces w(0) = 0.1992") {
    const auto s = w_sup(0.0);
    CHECK(std::abs(s.value - 0.1992) < 5e-4);
    CHECK(std::abs(s.residuals[0]) < 1e-8);
    CHECK(std::abs(s.residuals[1]) < 1e-8);
    CHECK_FALSE(s.upper_bound_only);
  }

  TEST_CASE("w_x is unimodal in x") {
    for (double h : {0.0, 0.2, 0.35}) {
      const auto s = w_sup(h);
      CHECK(w_x(s.x_star - 0.1, h) < s.value);
      CHECK(w_x(s.x_star + 0.1, h) < s.value);
      int sign_changes = 0;
      double prev = w_x(s.x_star - 0.3, h + 0.0);
      double prev_slope = 1.0;
      for (double x = s.x_star - 0.3 + 0.01; x < s.x_star + 1.0; x += 0.01) {
        const double v = w_x(x, h);
        const double slope = v - prev;
        if ((slope > 0) != (prev_slope > 0)) ++sign_changes;
        prev = v;
        prev_slope = slope;
      }
      CHECK(sign_changes == 1);
    }
  }

  TEST_CASE("residuals vanish at every reported saddle") {
    for (double h : {-0.3, 0.0, 0.1, 0.25, 0.5})
      for (double r : {0.6, 0.8, 1.0}) {
        const auto s = w_sup(h, r);
        CHECK(std::abs(s.residuals[0]) < 1e-8);
        CHECK(std::abs(s.residuals[1]) < 1e-8);
        CHECK(s.upper_bound_only == (r < 1.0));
      }
  }

  TEST_CASE("r = 1/2 leaves only the quadratic and entropy terms") {
    const double c = w_x(0.0, 0.0, 0.5);
    for (double x : {-0.4, 0.1, 0.7})
      for (double h : {0.0, 0.3, 1.0}) CHECK(w_x(x, h, 0.5) + 2 * x * x == doctest::Approx(c).epsilon(1e-14));
  }

  TEST_CASE("h_star") {
    const double h = h_star();
    CHECK(std::abs(h - 0.3513) < 5e-4);
    CHECK(std::abs(w_sup(h).value) < 1e-6);
    CHECK(w_sup(0.3).value > 0.0);
    CHECK(w_sup(0.4).value < 0.0);
    const double again = h_star();
    CHECK(std::memcmp(&h, &again, sizeof h) == 0);
  }

  TEST_CASE("density strictly decreasing in h on [-0.5, 1]") {
    double prev = w_sup(-0.5).value;
    for (int k = 1; k < 50; ++k) {
      const double h = -0.5 + 1.5 * k / 49.0;
      const double v = w_sup(h).value;
      REQUIRE(v < prev);
      prev = v;
    }
  }

  TEST_CASE("w_closed") {
    CHECK(w_closed(20.0) < -10.0);
    CHECK(w_closed(0.0) > w_closed(0.5));
    double prev = w_closed(-1.0);
    for (double h = -0.9; h < 2.0; h += 0.1) {
      const double v = w_closed(h);
      REQUIRE(v < prev);
      prev = v;
    }
  }

  TEST_CASE("closed-form root is compared only when the audit says both forms share it") {
    const auto rep = calibration_audit();
    CHECK(rep.selected == kCalibratedConvention);
    if (rep.closed_and_variational_share_root) CHECK(std::abs(rep.closed_form_root - h_star()) < 1e-4);
  }

  TEST_CASE("w_energy is the change of variables E = -sqrt2 x") {
    for (double x : {0.2, 0.36, 0.55})
      for (double h : {0.0, 0.2})
        CHECK(w_energy(-std::numbers::sqrt2 * x, h) == doctest::Approx(w_x(x, h)).epsilon(1e-14));
    const auto s = w_sup(0.0);
    const double e_star = -std::numbers::sqrt2 * s.x_star;
    CHECK(w_energy(e_star - 1e-3, 0.0) < w_energy(e_star, 0.0));
    CHECK(w_energy(e_star + 1e-3, 0.0) < w_energy(e_star, 0.0));
  }

  TEST_CASE("w_energy at the reference E_max(0) = -0.2865 is within 1e-3 of zero") {
    CHECK(std::abs(w_energy(-0.2865, 0.0)) < 1e-3);
  }

  TEST_CASE("energy roots at h = 0") {
    const auto r = energy_roots(0.0);
    CHECK(std::abs(r.e_min - (-0.7915)) < 1e-3);
    CHECK(std::abs(r.e_max - (-0.2865)) < 1e-3);
    CHECK(std::abs(w_energy(r.e_min, 0.0)) < 1e-9);
    CHECK(std::abs(w_energy(r.e_max, 0.0)) < 1e-9);
  }

  TEST_CASE("energy roots bracket the maximiser and close up near h*") {
    double prev_width = 1e9;
    for (double h : {0.0, 0.1, 0.2, 0.3, 0.35}) {
      const auto r = energy_roots(h);
      const double e_star = -std::numbers::sqrt2 * w_sup(h).x_star;
      CHECK(r.e_min < e_star);
      CHECK(e_star < r.e_max);
      CHECK(r.e_max - r.e_min < prev_width);
      prev_width = r.e_max - r.e_min;
    }
    CHECK(prev_width < 0.1);
    CHECK_THROWS_AS(energy_roots(h_star() + 1e-3), DomainError);
    CHECK_THROWS_AS(energy_roots(0.5), DomainError);
  }

  TEST_CASE("energy roots are continuous in h") {
    for (double h = 0.0; h < 0.34; h += 0.02) {
      const auto a = energy_roots(h), b = energy_roots(h + 1e-3);
      CHECK(std::abs(a.e_max - b.e_max) < 20 * 1e-3);
      CHECK(std::abs(a.e_min - b.e_min) < 20 * 1e-3);
    }
  }

  TEST_CASE("binary entropy") {
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    CHECK(binary_entropy(0.5) == doctest::Approx(std::log(2.0)));
  }

  TEST_CASE("parameter checks") {
    CHECK_THROWS_AS(w_x(0.3, 0.0, 0.0), ParameterError);
    CHECK_THROWS_AS(w_sup(0.0, 1.5), ParameterError);
  }
}
