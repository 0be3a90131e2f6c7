#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hstab/graphs.hpp"
#include "hstab/stability.hpp"

namespace hstab {

enum class MoveKind { single_flip, swap_pair };

std::string_view move_name(MoveKind m);
MoveKind parse_move(std::string_view s);

/// Geometric inverse-temperature ramp over `steps` sweeps of n proposals.
struct AnnealSchedule {
  double rho_start = 1.0;
  double rho_end = 200.0;
  int steps = 200;
  double epsilon1 = 0.05;
  MoveKind move_kind = MoveKind::single_flip;

  void validate() const;
  double rho_at(int step) const;
};

enum class EnergyDirection { ge, le };

/// Adds the hinge (nE - H)+ (ge) or (H - nE)+ (le) to the deficit.
struct EnergyConstraint {
  EnergyDirection direction = EnergyDirection::ge;
  double E = 0.0;
};

struct TrajectoryPoint {
  int step = 0;
  double rho = 0.0;
  double soft_deficit = 0.0;
  double hard_deficit = 0.0;
  std::uint32_t N = 0;
  double E = 0.0;
};

struct SearchResult {
  SpinConfig best_sigma;
  double best_deficit = 0.0;
  StabilityReport best_report;
  int restarts = 1;
  std::uint64_t rng_seed = 0;
  std::vector<TrajectoryPoint> trajectory;
};

/// g(t) = gamma log(1 + e^{t/gamma}) with gamma = epsilon1 / log 2, so g(0) = epsilon1.
double softplus(double t, double epsilon1);

/// Metropolis acceptance min(1, exp(-rho * delta)).
double acceptance_probability(double rho, double delta);

/// Pair moves (swap_pair) search every (+, -) pair exactly for n <= this;
/// above it only pairs among the best single-flip candidates are scored.
inline constexpr std::uint32_t kExactSwapLimit = 64;
inline constexpr std::uint32_t kSwapCandidates = 32;

/// Steepest descent on D(W, h, sigma) with lowest-index tie-breaking. For
/// single flips with h <= 0 a repair phase then flips unstable vertices while
/// that lowers H, which leaves every vertex 0-stable on loop-free graphs.
SearchResult greedy_descent(const WeightedGraph& g, double h, const SpinConfig& sigma0, MoveKind move);

/// Best of `restarts` greedy runs from random starts (bisections for swap_pair).
SearchResult greedy_restarts(const WeightedGraph& g, double h, MoveKind move, int restarts, std::uint64_t seed);

/// Metropolis dynamics on sum_v g(h - s_v) (+ the soft energy hinge). Returns
/// the configuration with the smallest hard deficit seen.
SearchResult anneal(const WeightedGraph& g, double h, const AnnealSchedule& schedule, std::uint64_t seed,
                    std::optional<EnergyConstraint> constraint = std::nullopt, bool record_trajectory = false,
                    const SpinConfig* init = nullptr);

/// CSV columns step,rho,soft_deficit,hard_deficit,N,E.
void write_trajectory_csv(const SearchResult& r, std::ostream& os);

/// One ensemble in a universality sweep: a sparse model with an interaction,
/// or a dense Gaussian matrix (d ignored).
struct EnsembleSpec {
  std::string label;
  Model model = Model::gnp;
  Interaction interaction = Interaction::ferro;
};

/// "ferro", "antiferro", "spin_glass" (gnp), "dense_gaussian", or
/// "<model>:<interaction>".
EnsembleSpec parse_ensemble(std::string_view s);

/// Centered (and, for +-1 weights with non-zero mean, variance-matched)
/// instance used by the universality sweep.
WeightedGraph universality_graph(const EnsembleSpec& e, std::uint32_t n, double d, std::uint64_t seed,
                                 double* scale_out = nullptr);

struct UniversalityRow {
  std::string model;
  double d = 0.0;
  double h = 0.0;
  int seeds = 0;
  double mean_D = 0.0;
  double sd_D = 0.0;
  double mean_N = 0.0;
  double sd_N = 0.0;
  double scale = 1.0;
};

struct UniversalityGap {
  double d = 0.0;
  double h = 0.0;
  double gap = 0.0;
};

struct UniversalityTable {
  std::vector<UniversalityRow> rows;
  std::vector<UniversalityGap> gaps;
};

UniversalityTable universality_sweep(const std::vector<EnsembleSpec>& models, std::uint32_t n,
                                     const std::vector<double>& d_grid, const std::vector<double>& h_grid,
                                     int seeds, std::uint64_t seed, const AnnealSchedule& schedule, int jobs = 1);

}  // namespace hstab
