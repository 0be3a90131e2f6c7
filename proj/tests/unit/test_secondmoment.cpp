#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hstab/errors.hpp"
#include "hstab/firstmoment.hpp"
#include "hstab/secondmoment.hpp"
#include "hstab/specfun.hpp"

using namespace hstab;

namespace {

double max_abs(const std::array<double, 3>& r) {
  return std::max({std::abs(r[0]), std::abs(r[1]), std::abs(r[2])});
}

}  // namespace

TEST_SUITE("secondmoment") {
  TEST_CASE("W at zero overlap is twice the first-moment density") {
    for (double x : {0.3, 0.45, 0.7})
      for (double h : {0.0, 0.15, 0.3}) {
        const auto s = w_overlap({x, 0.0, h});
        CHECK(std::abs(s.value - 2.0 * w_x(x, h)) < 1e-6);
        CHECK(max_abs(s.residuals) < 1e-7);
      }
  }

  TEST_CASE("W is symmetric in omega") {
    for (double om : {0.1, 0.4, 0.8, 0.999}) {
      const auto a = w_overlap(clamped({0.4, om, 0.1}));
      const auto b = w_overlap(clamped({0.4, -om, 0.1}));
      CHECK(a.value == doctest::Approx(b.value).epsilon(1e-9));
      CHECK(a.theta1_star == doctest::Approx(b.theta2_star).epsilon(1e-6));
    }
  }

  TEST_CASE("inner minimum beats a theta grid") {
    const OverlapQuery q{0.4, 0.3, 0.1};
    const auto range = t_range(q);
    const double t = 0.5 * (range[0] + range[1]);
    const auto in = inner_min(t, q);
    CHECK(std::abs(in.G - f_objective(t, in.theta1, in.theta2, q)) < 1e-12);
    double grid_best = INFINITY;
    for (double t1 = in.theta1 - 2.0; t1 <= in.theta1 + 2.0; t1 += 0.05)
      for (double t2 = in.theta2 - 2.0; t2 <= in.theta2 + 2.0; t2 += 0.05)
        grid_best = std::min(grid_best, f_objective(t, t1, t2, q));
    // G is an infimum: no grid point may undercut it.
    CHECK(grid_best >= in.G - 1e-12);
    CHECK(grid_best - in.G < 1e-2);
  }

  TEST_CASE("the log P minimiser") {
    const auto m = minimize_log_pfun(0.8, 0.5);
    REQUIRE(std::isfinite(m.value));
    CHECK(std::abs(m.value - log_pfun(m.theta, 0.8, 0.5)) < 1e-12);
    CHECK(std::abs(m.theta + log_qfun_derivs(m.theta, 0.8, 0.5).d1) < 1e-9);
    for (double d = -1.0; d <= 1.0; d += 0.01) CHECK(log_pfun(m.theta + d, 0.8, 0.5) >= m.value - 1e-12);
    const auto unbounded = minimize_log_pfun(0.8, -0.1);
    CHECK(std::isinf(unbounded.value));
    CHECK(unbounded.value < 0);
  }

  TEST_CASE("figure shape at h*: peak 0 at omega = 0") {
    const double h = h_star();
    const double x = w_sup(h).x_star;
    const auto zero = w_overlap({x, 0.0, h});
    CHECK(std::abs(zero.value) < 1e-5);
    for (double om = -0.95; om <= 0.96; om += 0.05) {
      if (std::abs(om) < 1e-9) continue;
      CHECK(w_overlap(clamped({x, om, h})).value <= 0.0);
    }
  }

  TEST_CASE("h = 0.05: W stays positive for every clamped overlap") {
    const double h = 0.05;
    const double x = w_sup(h).x_star;
    for (int k = 0; k <= 40; ++k) CHECK(w_overlap(clamped({x, -1.0 + 0.05 * k, h})).value > 0.0);
  }

  TEST_CASE("clamping and domain") {
    CHECK(clamped({0.4, 1.0, 0.0}).omega == doctest::Approx(1.0 - kOmegaClamp));
    CHECK(clamped({0.4, -1.0, 0.0}).omega == doctest::Approx(-1.0 + kOmegaClamp));
    CHECK_THROWS_AS(clamped({0.4, 1.2, 0.0}), ParameterError);
    CHECK_THROWS_AS(w_overlap({0.01, 0.0, 0.3}), DomainError);
  }

  TEST_CASE("E_cor(0)") {
    const double e = e_cor(0.0);
    CHECK(std::abs(e - (-0.6725)) < 2e-3);
    CHECK_FALSE(correlated(e + 1e-3, 0.0));
    CHECK(correlated(e - 1e-3, 0.0));
    const auto roots = energy_roots(0.0);
    CHECK(roots.e_min < e);
    CHECK(e < roots.e_max);
  }

  TEST_CASE("correlated energies have an interior overlap maximiser") {
    const double e = e_cor(0.0);
    const auto below = scan_omega(e - 0.02, 0.0);
    CHECK(below.omega_argmax > 0.05);
    CHECK(below.w_max > below.w_zero);
    const auto above = scan_omega(e + 0.02, 0.0);
    CHECK(above.omega_argmax == 0.0);
  }

  TEST_CASE("method tags") {
    CHECK(method_tag(SaddleMethod::newton) == "newton");
    CHECK(method_tag(SaddleMethod::max_min) == "max_min");
  }
}
