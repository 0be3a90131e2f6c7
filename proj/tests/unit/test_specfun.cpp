#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "../common/brute.hpp"
#include "hstab/quadrature.hpp"
#include "hstab/rng.hpp"
#include "hstab/specfun.hpp"

using namespace hstab;

TEST_SUITE("specfun") {
  TEST_CASE("log1perf anchors") {
    CHECK(log1perf(0.0) == 0.0);
    CHECK(log1perf(40.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    // 50-digit erfc values (tests/oracles/specfun_oracle.py)
    CHECK(std::abs(log1perf(-3.0) - (-10.720363041981112568)) < 1e-12);
    CHECK(std::abs(log1perf(-6.5) / -44.705670189533115308 - 1.0) < 1e-12);
    CHECK(std::abs(log1perf(-10.0) / -102.87988902484488857 - 1.0) < 1e-12);
    CHECK(std::abs(log1perf(-30.0) / -903.97411711064387808 - 1.0) < 1e-12);
    CHECK(std::abs(log1perf(2.5) - 0.69294368384717120098) < 1e-12);
    CHECK(std::abs(log1perf(0.1) - 0.10657640058652248502) < 1e-12);
    CHECK(std::isfinite(log1perf(-40.0)));
  }

  TEST_CASE("log1perf is monotone and continuous across the asymptotic switch") {
    double prev = log1perf(-12.0);
    for (double y = -12.0 + 1e-3; y < 4.0; y += 1e-3) {
      const double v = log1perf(y);
      REQUIRE(v > prev);
      prev = v;
    }
    CHECK(std::abs(log1perf(-6.0 - 1e-12) - log1perf(-6.0 + 1e-12)) < 1e-10);
  }

  TEST_CASE("erfc(-y) + erfc(y) = 2") {
    for (double y = -5.0; y <= 5.0; y += 0.01)
      REQUIRE(std::abs(std::exp(log1perf(y)) + std::exp(log1perf(-y)) - 2.0) < 1e-12);
  }

  TEST_CASE("log1perf derivative against central differences") {
    for (double y : {-20.0, -7.0, -3.0, -0.5, 0.0, 1.0, 4.0}) {
      const double h = 1e-5;
      const double fd = (log1perf(y + h) - log1perf(y - h)) / (2 * h);
      CHECK(log1perf_deriv(y) == doctest::Approx(fd).epsilon(1e-7));
    }
  }

  TEST_CASE("pfun closed forms") {
    CHECK(pfun(0.0, 0.0, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(pfun(0.0, 1.0, 0.0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(qfun(0.0, 1.0, 0.0) == doctest::Approx(std::numbers::pi / 4).epsilon(1e-12));
    CHECK(qfun(0.0, 0.0, 0.0) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-12));
    for (double t : {-1.5, 0.0, 0.7})
      for (double a2 : {-2.0, 0.3, 1.1}) {
        const double closed = 0.5 * std::exp(0.5 * t * t) * std::erfc(-(t + a2) / std::numbers::sqrt2);
        CHECK(pfun(t, 0.0, a2) == doctest::Approx(closed).epsilon(1e-11));
      }
    CHECK(std::abs(pfun(0.3, 0.8, -0.5) - 0.23666790273395164783) < 1e-10);
    CHECK(std::abs(qfun(-1.2, 2.5, 0.7) - 0.19108731362024034244) < 1e-10);
  }

  TEST_CASE("log_pfun extended-precision anchors") {
    CHECK(log_pfun(0.0, 1.0, 0.0) == doctest::Approx(std::log(0.25)).epsilon(1e-12));
    CHECK(std::abs(log_pfun(10.0, 0.5, 0.0) - (50.0 - 3.7440858616386829878e-19)) < 1e-8);
    CHECK(std::abs(log_pfun(0.0, 0.0, -8.0) - (-35.013437159914549896)) < 1e-9);
    CHECK(std::abs(log_qfun(-6.0, 40.0, 0.0) - (-25.348834995440471629)) < 1e-8);
    CHECK(std::abs(log_qfun(-8.0, 44.7, 0.5) - (-36.005137264214598099)) < 1e-8);
  }

  TEST_CASE("P/Q identity and 2-D brute quadrature on random points") {
    Philox rng(20240601);
    for (int k = 0; k < 100; ++k) {
      const double t = -2.0 + 4.0 * rng.uniform();
      const double a1 = 3.0 * rng.uniform();
      const double a2 = -2.0 + 4.0 * rng.uniform();
      const double p = pfun(t, a1, a2), q = qfun(t, a1, a2);
      REQUIRE(std::abs(p - std::exp(0.5 * t * t) / std::numbers::pi * q) < 1e-10);
      REQUIRE(std::abs(std::log(p) - log_pfun(t, a1, a2)) < 1e-10);
      REQUIRE(std::abs(p - brute::p2d(t, a1, a2)) < 1e-8);
    }
  }

  TEST_CASE("monotone in a2 and a1") {
    for (double t : {-1.0, 0.0, 1.0}) {
      double prev = pfun(t, 0.7, -3.0);
      for (double a2 = -2.9; a2 <= 3.0; a2 += 0.1) {
        const double v = pfun(t, 0.7, a2);
        REQUIRE(v > prev);
        prev = v;
      }
      prev = pfun(t, 0.0, 0.2);
      for (double a1 = 0.1; a1 <= 5.0; a1 += 0.1) {
        const double v = pfun(t, a1, 0.2);
        REQUIRE(v < prev);
        prev = v;
      }
    }
  }

  TEST_CASE("tail truncation audit") {
    QuadratureSpec q, q2;
    q2.tail_cutoff = 2 * q.tail_cutoff;
    for (double t : {-2.0, 0.0, 1.5})
      for (double a1 : {0.0, 0.5, 2.0}) CHECK(std::abs(pfun(t, a1, 0.4, q) - pfun(t, a1, 0.4, q2)) < q.abs_tol);
  }

  TEST_CASE("log-derivatives of Q against finite differences") {
    for (double m : {-3.0, -0.4, 0.0, 1.2})
      for (double a1 : {0.2, 1.0, 3.0}) {
        const auto d = log_qfun_derivs(m, a1, 0.0);
        const double h = 1e-4;
        const double lp = log_qfun(m + h, a1, 0.0), lm = log_qfun(m - h, a1, 0.0);
        CHECK(d.d1 == doctest::Approx((lp - lm) / (2 * h)).epsilon(1e-6));
        CHECK(d.d2 == doctest::Approx((lp - 2 * d.value + lm) / (h * h)).epsilon(1e-4));
      }
  }

  TEST_CASE("parameter and range checks") {
    CHECK_THROWS_AS(pfun(0.0, -0.1, 0.0), ParameterError);
    CHECK_THROWS_AS(pfun(40.0, 0.5, 0.0), std::range_error);
    CHECK(std::isfinite(log_pfun(40.0, 0.5, 0.0)));
    QuadratureSpec bad;
    bad.abs_tol = 0.0;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
  }
}
