#include "hstab/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "hstab/errors.hpp"
#include "hstab/parallel.hpp"
#include "hstab/rng.hpp"
#include "hstab/search.hpp"
#include "hstab/stability.hpp"

namespace hstab {

namespace {

struct BlockTally {
  std::vector<std::uint64_t> hist;  // (cut, N) flattened
  std::vector<std::uint64_t> by_count;
  std::map<std::uint64_t, std::uint64_t> x0_by_cut;
  std::vector<std::uint32_t> stable_bisections;
  std::uint64_t configurations = 0;
  double d_min = std::numeric_limits<double>::infinity();
  std::uint32_t n_max = 0;
  std::uint32_t argmin_gray = 0;
};

std::vector<std::int8_t> spins_of(std::uint32_t gray, std::uint32_t n) {
  std::vector<std::int8_t> s(n);
  for (std::uint32_t v = 0; v < n; ++v) s[v] = (gray >> v) & 1u ? -1 : 1;
  return s;
}

std::uint64_t max_cut_slots(const WeightedGraph& g) {
  if (!g.is_dense()) return g.edges().size();
  return std::uint64_t{g.n()} * (g.n() - 1) / 2;
}

// Cut change when v flips, given the spins before the flip.
long long cut_delta(const WeightedGraph& g, const SpinConfig& sigma, std::uint32_t v) {
  long long d = 0;
  const int sv = sigma.spin(v);
  if (g.is_dense()) {
    const std::uint32_t n = g.n();
    const double* row = g.matrix().data() + static_cast<std::size_t>(v) * n;
    for (std::uint32_t j = 0; j < n; ++j)
      if (j != v && row[j] != 0.0) d += sigma.spin(j) == sv ? 1 : -1;
  } else {
    const auto& off = g.adj_offsets();
    const auto& to = g.adj_targets();
    for (auto k = off[v]; k < off[v + 1]; ++k) d += sigma.spin(to[k]) == sv ? 1 : -1;
  }
  return d;
}

}  // namespace

std::uint64_t OracleCensus::X_by_r(double r) const {
  if (!(r >= 0.0 && r <= 1.0)) throw ParameterError("X_by_r: r must lie in [0, 1]");
  const auto k = static_cast<std::uint32_t>(std::ceil(r * n - 1e-9));
  return X_by_count.at(std::min(k, n));
}

OracleCensus enumerate_census(const WeightedGraph& g, double h, bool restrict_bisections, bool pairs, int jobs) {
  const std::uint32_t n = g.n();
  if (n > kCensusLimit)
    throw OracleLimitError("enumerate_census: n=" + std::to_string(n) + " exceeds the limit of " +
                           std::to_string(kCensusLimit));
  if (pairs && n > kPairCensusLimit)
    throw OracleLimitError("enumerate_census: pair census needs n <= " + std::to_string(kPairCensusLimit) +
                           " (got n=" + std::to_string(n) + ")");

  const std::uint64_t total = std::uint64_t{1} << n;
  const std::uint64_t cut_slots = max_cut_slots(g);
  const std::size_t blocks = static_cast<std::size_t>(std::min<std::uint64_t>(total, 64));
  std::vector<BlockTally> tallies(blocks);
  const long long parity = n % 2;

  parallel_for(blocks, jobs, [&](std::size_t b) {
    auto& t = tallies[b];
    t.hist.assign((cut_slots + 1) * (n + 1), 0);
    t.by_count.assign(n + 1, 0);
    const std::uint64_t lo = total * b / blocks, hi = total * (b + 1) / blocks;
    auto gray = static_cast<std::uint32_t>(lo ^ (lo >> 1));
    SpinConfig sigma(g, spins_of(gray, n));
    auto cut = static_cast<long long>(cut_and_x(sigma, g).cut);
    for (std::uint64_t i = lo; i < hi; ++i) {
      if (i > lo) {
        const auto v = static_cast<std::uint32_t>(std::countr_zero(i));
        cut += cut_delta(g, sigma, v);
        sigma.flip(g, v);
        gray ^= 1u << v;
      }
      const bool bisection = std::llabs(sigma.magnetization()) <= parity;
      if (restrict_bisections && !bisection) continue;
      std::uint32_t stable = 0;
      CompensatedSum d;
      for (std::uint32_t v = 0; v < n; ++v) {
        const double s = stability_of(v, sigma, g);
        if (s >= h)
          ++stable;
        else
          d.add(h - s);
      }
      ++t.configurations;
      ++t.hist[static_cast<std::size_t>(cut) * (n + 1) + stable];
      ++t.by_count[stable];
      if (d.value() < t.d_min) {
        t.d_min = d.value();
        t.argmin_gray = gray;
      }
      t.n_max = std::max(t.n_max, stable);
      if (bisection && stable == n) {
        ++t.x0_by_cut[static_cast<std::uint64_t>(cut)];
        if (pairs) t.stable_bisections.push_back(gray);
      }
    }
  });

  OracleCensus c;
  c.n = n;
  c.h = h;
  c.bisections_only = restrict_bisections;
  c.has_pairs = pairs;
  c.D_min = std::numeric_limits<double>::infinity();
  std::vector<std::uint64_t> hist((cut_slots + 1) * (n + 1), 0), by_count(n + 1, 0);
  std::vector<std::uint32_t> stable;
  std::uint32_t arg = 0;
  for (const auto& t : tallies) {
    c.configurations += t.configurations;
    for (std::size_t k = 0; k < hist.size(); ++k) hist[k] += t.hist[k];
    for (std::size_t k = 0; k <= n; ++k) by_count[k] += t.by_count[k];
    for (const auto& [cut, cnt] : t.x0_by_cut) c.X0_by_cut[cut] += cnt;
    stable.insert(stable.end(), t.stable_bisections.begin(), t.stable_bisections.end());
    // Blocks are merged in order, so the first minimiser in Gray order wins.
    if (t.d_min < c.D_min) {
      c.D_min = t.d_min;
      arg = t.argmin_gray;
    }
    c.N_max = std::max(c.N_max, t.n_max);
  }
  for (std::uint64_t cut = 0; cut <= cut_slots; ++cut)
    for (std::uint32_t k = 0; k <= n; ++k)
      if (const auto cnt = hist[cut * (n + 1) + k]) c.histogram[{cut, k}] = cnt;
  c.X_by_count.assign(n + 1, 0);
  std::uint64_t run = 0;
  for (std::uint32_t k = n + 1; k-- > 0;) {
    run += by_count[k];
    c.X_by_count[k] = run;
  }
  if (c.configurations > 0) c.argmin = spins_of(arg, n);
  if (pairs) {
    for (auto a : stable)
      for (auto b : stable) ++c.pair_overlap_hist[static_cast<long long>(n) - 2LL * std::popcount(a ^ b)];
  }
  return c;
}

nlohmann::json to_json(const OracleCensus& c) {
  nlohmann::json j;
  j["n"] = c.n;
  j["h"] = c.h;
  j["bisections_only"] = c.bisections_only;
  j["configurations"] = c.configurations;
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& [key, cnt] : c.histogram)
    hist.push_back({{"cut", key.first}, {"stable", key.second}, {"count", cnt}});
  j["histogram"] = hist;
  nlohmann::json xr = nlohmann::json::object();
  for (std::uint32_t k = 0; k <= c.n; ++k) xr[std::to_string(k)] = c.X_by_count[k];
  j["X_by_count"] = xr;
  nlohmann::json x0 = nlohmann::json::object();
  for (const auto& [cut, cnt] : c.X0_by_cut) x0[std::to_string(cut)] = cnt;
  j["X0_by_cut"] = x0;
  if (c.has_pairs) {
    nlohmann::json po = nlohmann::json::object();
    for (const auto& [ov, cnt] : c.pair_overlap_hist) po[std::to_string(ov)] = cnt;
    j["pair_overlap_hist"] = po;
  }
  j["D_min"] = c.D_min;
  j["N_max"] = c.N_max;
  return j;
}

McFirstMoment mc_first_moment(Model model, std::uint32_t n, double d, double h, Interaction inter, int num_graphs,
                              std::uint64_t seed, int jobs) {
  if (n > kSmallInstanceLimit)
    throw OracleLimitError("mc_first_moment: n=" + std::to_string(n) + " exceeds the limit of " +
                           std::to_string(kSmallInstanceLimit));
  if (num_graphs < 1) throw ParameterError("mc_first_moment: need at least one graph");
  std::vector<double> counts(static_cast<std::size_t>(num_graphs));
  parallel_for(counts.size(), jobs, [&](std::size_t k) {
    const auto g = is_dense(model) ? gen_dense(model == Model::dense_gaussian ? DenseKind::gaussian
                                                                              : DenseKind::bernoulli_half,
                                               n, mix64(seed + k))
                                   : gen(model, n, d, inter, mix64(seed + k));
    counts[k] = static_cast<double>(enumerate_census(g, h, false).X_by_count[n]);
  });
  McFirstMoment r;
  r.graphs = num_graphs;
  double mean = 0.0;
  for (double c : counts) mean += c;
  mean /= num_graphs;
  r.mean_count = mean;
  if (mean == 0.0) {
    r.finite = false;
    r.density = -std::numeric_limits<double>::infinity();
    r.stderr_ = std::numeric_limits<double>::infinity();
    return r;
  }
  double ss = 0.0;
  for (double c : counts) ss += (c - mean) * (c - mean);
  const double sd = num_graphs > 1 ? std::sqrt(ss / (num_graphs - 1)) : 0.0;
  r.density = std::log(mean) / n;
  r.stderr_ = sd / std::sqrt(static_cast<double>(num_graphs)) / mean / n;
  return r;
}

VerifyReport verify_search(const WeightedGraph& g, double h, int restarts, std::uint64_t seed) {
  if (g.n() > kSmallInstanceLimit)
    throw OracleLimitError("verify_search: n=" + std::to_string(g.n()) + " exceeds the limit of " +
                           std::to_string(kSmallInstanceLimit));
  VerifyReport r;
  r.census_D_min = enumerate_census(g, h, false).D_min;
  r.greedy_D = greedy_restarts(g, h, MoveKind::single_flip, restarts, seed).best_deficit;
  AnnealSchedule sched;
  sched.steps = 200;
  r.anneal_D = anneal(g, h, sched, mix64(seed)).best_deficit;
  r.greedy_gap = r.greedy_D - r.census_D_min;
  r.anneal_gap = r.anneal_D - r.census_D_min;
  return r;
}

nlohmann::json to_json(const VerifyReport& r) {
  return {{"census_D_min", r.census_D_min}, {"greedy_D", r.greedy_D}, {"anneal_D", r.anneal_D},
          {"greedy_gap", r.greedy_gap}, {"anneal_gap", r.anneal_gap}};
}

}  // namespace hstab
