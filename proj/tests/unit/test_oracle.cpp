#include <doctest.h>

#include <bit>
#include <cmath>
#include <numbers>

#include "hstab/errors.hpp"
#include "hstab/graphs.hpp"
#include "hstab/oracle.hpp"
#include "hstab/stability.hpp"

using namespace hstab;

namespace {

std::vector<std::int8_t> spins_of(std::uint64_t mask, std::uint32_t n) {
  std::vector<std::int8_t> s(n);
  for (std::uint32_t i = 0; i < n; ++i) s[i] = (mask >> i) & 1 ? -1 : 1;
  return s;
}

// Plain loop over masks, every configuration rebuilt from scratch.
struct Naive {
  std::map<std::pair<std::uint64_t, std::uint32_t>, std::uint64_t> histogram;
  std::map<std::uint64_t, std::uint64_t> x0_by_cut;
  double d_min = INFINITY;
};

Naive naive(const WeightedGraph& g, double h, bool bisections) {
  Naive out;
  const std::uint32_t n = g.n();
  for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
    const SpinConfig s(g, spins_of(mask, n));
    if (bisections && !s.is_bisection()) continue;
    const auto rep = stability_report(s, g, h);
    ++out.histogram[{rep.cut, rep.N}];
    if (s.is_bisection() && rep.N == n) ++out.x0_by_cut[rep.cut];
    out.d_min = std::min(out.d_min, rep.D);
  }
  return out;
}

WeightedGraph triangle() {
  return WeightedGraph::sparse(3, 3.0, Model::gnm, Interaction::antiferro, {{0, 1, -1.0}, {0, 2, -1.0}, {1, 2, -1.0}});
}

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("triangle: exactly the six non-constant configurations are 0-stable") {
    const auto c = enumerate_census(triangle(), 0.0, false);
    CHECK(c.configurations == 8u);
    CHECK(c.X_by_r(1.0) == 6u);
    CHECK(c.X_by_r(0.0) == 8u);
    CHECK(c.D_min == 0.0);
    CHECK(c.N_max == 3u);
  }

  TEST_CASE("Gray-code census equals the naive recount") {
    for (std::uint32_t n : {5u, 8u, 11u, 12u}) {
      for (const auto& g : {gen(Model::gnp, n, 4.0, Interaction::dilute_spin_glass, n),
                            gen(Model::config_model, n, 3.0, Interaction::antiferro, n + 1),
                            center_weights(gen(Model::gnp, n, 4.0, Interaction::ferro, n + 2)),
                            gen_dense(DenseKind::gaussian, n, n + 3)})
        for (bool bis : {false, true}) {
          const double h = 0.15;
          const auto c = enumerate_census(g, h, bis);
          const auto ref = naive(g, h, bis);
          CHECK(c.histogram == ref.histogram);
          CHECK(c.X0_by_cut == ref.x0_by_cut);
          CHECK(c.D_min == doctest::Approx(ref.d_min).epsilon(1e-12));
          const SpinConfig arg(g, c.argmin);
          CHECK(deficit(arg, g, h) == doctest::Approx(c.D_min).epsilon(1e-12));
        }
    }
  }

  TEST_CASE("census invariants") {
    const auto g = gen(Model::gnp, 14, 5.0, Interaction::dilute_spin_glass, 3);
    for (bool bis : {false, true}) {
      const auto c = enumerate_census(g, 0.1, bis);
      std::uint64_t mass = 0;
      for (const auto& [key, count] : c.histogram) mass += count;
      CHECK(mass == c.configurations);
      CHECK(c.configurations == (bis ? 3432u : 16384u));
      for (std::size_t k = 1; k < c.X_by_count.size(); ++k) REQUIRE(c.X_by_count[k] <= c.X_by_count[k - 1]);
      double prev = INFINITY;
      for (double r = 0.0; r <= 1.0; r += 0.01) {
        const double x = static_cast<double>(c.X_by_r(r));
        REQUIRE(x <= prev);
        prev = x;
      }
      CHECK((c.D_min == 0.0) == (c.X_by_r(1.0) >= 1));
    }
  }

  TEST_CASE("D_min = 0 iff some configuration is fully stable, across h") {
    const auto g = gen(Model::gnp, 12, 6.0, Interaction::antiferro, 9);
    for (double h : {-0.5, 0.0, 0.3, 0.8, 2.0}) {
      const auto c = enumerate_census(g, h, false);
      CHECK((c.D_min == 0.0) == (c.X_by_r(1.0) >= 1));
    }
  }

  TEST_CASE("pair overlap histogram") {
    const auto g = gen(Model::gnp, 12, 4.0, Interaction::antiferro, 5);
    const auto c = enumerate_census(g, 0.0, true, true);
    REQUIRE(c.has_pairs);
    std::uint64_t stable = 0;
    for (const auto& [cut, count] : c.X0_by_cut) stable += count;
    std::uint64_t pairs = 0;
    for (const auto& [ov, count] : c.pair_overlap_hist) {
      pairs += count;
      CHECK(count == c.pair_overlap_hist.at(-ov));
      CHECK((ov - 12) % 4 == 0);
    }
    CHECK(pairs == stable * stable);
    if (stable > 0) CHECK(c.pair_overlap_hist.at(12) == stable);
  }

  TEST_CASE("bisections of a fixed-edge antiferro graph obey E = -sqrt2 x") {
    const auto g = gen(Model::gnm, 14, 4.0, Interaction::antiferro, 2);
    const auto c = enumerate_census(g, 0.0, true);
    REQUIRE_FALSE(c.X0_by_cut.empty());
    for (std::uint64_t mask = 0; mask < (1ull << 14); ++mask) {
      if (std::popcount(mask) != 7) continue;
      const SpinConfig s(g, spins_of(mask, 14));
      const auto cx = cut_and_x(s, g);
      REQUIRE(std::abs(energy(s, g) + std::numbers::sqrt2 * cx.x) <= 2.0 / (14 * 2.0));
    }
  }

  TEST_CASE("size limits are refused") {
    const auto big = gen(Model::gnp, kCensusLimit + 1, 3.0, Interaction::ferro, 1);
    CHECK_THROWS_AS(enumerate_census(big, 0.0, false), OracleLimitError);
    const auto mid = gen(Model::gnp, kPairCensusLimit + 1, 3.0, Interaction::ferro, 1);
    CHECK_THROWS_AS(enumerate_census(mid, 0.0, true, true), OracleLimitError);
    CHECK_THROWS_AS(mc_first_moment(Model::gnp, kSmallInstanceLimit + 1, 3.0, 0.0, Interaction::ferro, 2, 1),
                    OracleLimitError);
  }

  TEST_CASE("thread count does not change the census") {
    const auto g = gen(Model::gnp, 16, 5.0, Interaction::dilute_spin_glass, 4);
    const auto a = enumerate_census(g, 0.2, false, false, 1);
    const auto b = enumerate_census(g, 0.2, false, false, 4);
    CHECK(to_json(a).dump() == to_json(b).dump());
  }

  TEST_CASE("finite-size first-moment density") {
    double prev = INFINITY;
    for (double h : {-0.5, 0.0, 0.3}) {
      const auto m = mc_first_moment(Model::gnm, 14, 6.0, h, Interaction::antiferro, 8, 3);
      REQUIRE(m.finite);
      CHECK(m.density < prev);
      CHECK(m.stderr_ >= 0.0);
      prev = m.density;
    }
    const auto far = mc_first_moment(Model::gnm, 12, 6.0, 5.0, Interaction::antiferro, 4, 3);
    CHECK_FALSE(far.finite);
    CHECK(std::isinf(far.density));
  }

  TEST_CASE("search verification against the census") {
    const auto tri = verify_search(triangle(), 0.0, 20, 1);
    CHECK(tri.greedy_gap == 0.0);
    CHECK(tri.anneal_gap == 0.0);
    const auto g = gen(Model::gnp, 14, 8.0, Interaction::dilute_spin_glass, 7);
    const auto r = verify_search(g, 0.2, 50, 2);
    CHECK(r.greedy_gap >= 0.0);
    CHECK(r.anneal_gap >= 0.0);
    CHECK(r.greedy_D == doctest::Approx(r.census_D_min + r.greedy_gap));
    CHECK(to_json(r).contains("greedy_gap"));
  }
}
