#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <vector>

#include <json.hpp>

#include "hstab/graphs.hpp"

namespace hstab {

class Philox;

/// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

/// Spin assignment with cached local fields and magnetization.
///
/// local_field(v) is sum_j w_vj sigma_j over the stored non-loop slots
/// (parallel slots counted with multiplicity). Loops and the centering offset
/// are folded in by the stability functions, not cached here.
class SpinConfig {
 public:
  SpinConfig() = default;
  SpinConfig(const WeightedGraph& g, std::vector<std::int8_t> spins);

  static SpinConfig random(const WeightedGraph& g, Philox& rng);
  static SpinConfig random_bisection(const WeightedGraph& g, Philox& rng);

  std::uint32_t n() const { return static_cast<std::uint32_t>(spins_.size()); }
  int spin(std::uint32_t v) const { return spins_[v]; }
  const std::vector<std::int8_t>& spins() const { return spins_; }
  long long magnetization() const { return mag_; }
  double local_field(std::uint32_t v) const { return fields_[v]; }
  const std::vector<double>& local_fields() const { return fields_; }

  bool is_bisection() const { return std::llabs(mag_) <= static_cast<long long>(spins_.size() % 2); }

  /// Flip sigma_v and update the neighbours' cached fields.
  void flip(const WeightedGraph& g, std::uint32_t v);

  /// Rebuild the caches from scratch.
  void recompute(const WeightedGraph& g);

  /// Largest deviation between the cached and recomputed fields/magnetization.
  double cache_drift(const WeightedGraph& g) const;

 private:
  std::vector<std::int8_t> spins_;
  std::vector<double> fields_;
  long long mag_ = 0;
};

/// Field entering s_v: cached field + 2 w_vv sigma_v (loops) + offset * M.
double effective_field(std::uint32_t v, const SpinConfig& sigma, const WeightedGraph& g);

double stability_of(std::uint32_t v, const SpinConfig& sigma, const WeightedGraph& g);

/// All s_v at once.
std::vector<double> stabilities(const SpinConfig& sigma, const WeightedGraph& g);

/// H = -(1/sqrt(norm)) [sum over non-loop slots w sigma_i sigma_j + sum of loop
/// weights + offset * sum_{i<j} sigma_i sigma_j].
double hamiltonian(const SpinConfig& sigma, const WeightedGraph& g);
double energy(const SpinConfig& sigma, const WeightedGraph& g);

/// H(sigma^(v)) - H(sigma), exact for every graph (loops and offset included).
double flip_delta_h(std::uint32_t v, const SpinConfig& sigma, const WeightedGraph& g);

double deficit(const SpinConfig& sigma, const WeightedGraph& g, double h);
double trunc_deficit(const SpinConfig& sigma, const WeightedGraph& g, double h);
double deficit_ge_E(const SpinConfig& sigma, const WeightedGraph& g, double h, double E);
double deficit_le_E(const SpinConfig& sigma, const WeightedGraph& g, double h, double E);

struct CutX {
  std::uint64_t cut = 0;
  double x = 0.0;
};

/// Cut = slots (or non-zero dense entries) joining opposite parts; x from
/// cut/n = d/4 + x sqrt(d/2) with d = norm_param.
CutX cut_and_x(const SpinConfig& sigma, const WeightedGraph& g);

struct StabilityReport {
  std::uint32_t n = 0;
  double h = 0.0;
  std::vector<double> s;
  std::uint32_t N = 0;
  double D = 0.0;
  double T = 0.0;
  double H = 0.0;
  double E = 0.0;
  std::uint64_t cut = 0;
  double x_param = 0.0;
  double min_s = 0.0;
};

StabilityReport stability_report(const SpinConfig& sigma, const WeightedGraph& g, double h);

/// {n, h, N, D, T, H, E, cut, x}
nlohmann::json to_json(const StabilityReport& r);

}  // namespace hstab
