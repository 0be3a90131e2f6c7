#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hstab/graphs.hpp"

namespace hstab {

inline constexpr std::uint32_t kCensusLimit = 24;
inline constexpr std::uint32_t kPairCensusLimit = 20;
inline constexpr std::uint32_t kSmallInstanceLimit = 20;

/// Exact tallies over all 2^n configurations (or all bisections).
struct OracleCensus {
  std::uint32_t n = 0;
  double h = 0.0;
  bool bisections_only = false;
  bool has_pairs = false;
  std::uint64_t configurations = 0;
  /// (cut, number of h-stable vertices) -> count
  std::map<std::pair<std::uint64_t, std::uint32_t>, std::uint64_t> histogram;
  /// X_by_count[k] = #configurations with at least k h-stable vertices, k = 0..n.
  std::vector<std::uint64_t> X_by_count;
  /// cut -> #fully h-stable bisections
  std::map<std::uint64_t, std::uint64_t> X0_by_cut;
  /// sum_i sigma_i sigma'_i -> #ordered pairs of fully h-stable bisections
  std::map<long long, std::uint64_t> pair_overlap_hist;
  double D_min = 0.0;
  std::uint32_t N_max = 0;
  std::vector<std::int8_t> argmin;

  /// #configurations with at least r n stable vertices.
  std::uint64_t X_by_r(double r) const;
};

/// Gray-code enumeration with incremental field updates, split into
/// contiguous blocks across `jobs` threads. Throws OracleLimitError past
/// kCensusLimit (kPairCensusLimit with pairs).
OracleCensus enumerate_census(const WeightedGraph& g, double h, bool restrict_bisections, bool pairs = false,
                              int jobs = 1);

nlohmann::json to_json(const OracleCensus& c);

struct McFirstMoment {
  double density = 0.0;  // (1/n) log(mean count); -inf when every count is 0
  double stderr_ = 0.0;
  double mean_count = 0.0;
  bool finite = true;
  int graphs = 0;
};

/// Finite-size analogue of the first-moment density: average exact count of
/// fully h-stable configurations over sampled graphs.
McFirstMoment mc_first_moment(Model model, std::uint32_t n, double d, double h, Interaction inter, int num_graphs,
                              std::uint64_t seed, int jobs = 1);

struct VerifyReport {
  double census_D_min = 0.0;
  double greedy_D = 0.0;
  double anneal_D = 0.0;
  double greedy_gap = 0.0;
  double anneal_gap = 0.0;
};

/// Compare greedy (best of `restarts`) and annealing against the exact minimum.
VerifyReport verify_search(const WeightedGraph& g, double h, int restarts = 200, std::uint64_t seed = 0);

nlohmann::json to_json(const VerifyReport& r);

}  // namespace hstab
