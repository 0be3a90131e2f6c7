#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hstab {

enum class Model { gnp, gnm, gnp_loops, gnm_loops, config_model, dense_gaussian, dense_bernoulli };
enum class Interaction { ferro, antiferro, dilute_spin_glass, custom };
enum class DenseKind { gaussian, bernoulli_half };

std::string_view model_name(Model m);
Model parse_model(std::string_view s);
std::string_view interaction_name(Interaction i);
Interaction parse_interaction(std::string_view s);
bool is_dense(Model m);

/// One edge slot. Parallel edges are separate slots; a loop has i == j.
struct Edge {
  std::uint32_t i;
  std::uint32_t j;
  double w;
};

/// Symmetric weighted graph with its stability normalization parameter.
///
/// Effective weights are stored + `offset` for every ordered pair including
/// the diagonal; the offset is the implicit rank-one part left by centering.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  /// Sparse graph from edge slots (i <= j is not required; stored as given).
  static WeightedGraph sparse(std::uint32_t n, double norm_param, Model model, Interaction inter,
                              std::vector<Edge> edges);
  /// Dense graph from a row-major n x n symmetric matrix with zero diagonal.
  static WeightedGraph dense(std::uint32_t n, double norm_param, Model model, Interaction inter,
                             std::vector<double> matrix);

  std::uint32_t n() const { return n_; }
  double norm_param() const { return norm_param_; }
  Model model() const { return model_; }
  Interaction interaction() const { return interaction_; }
  bool is_dense() const { return dense_; }
  double offset() const { return offset_; }
  bool centered() const { return centered_; }

  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<double>& matrix() const { return matrix_; }

  /// CSR neighbour lists over non-loop slots (both directions, with multiplicity).
  const std::vector<std::uint64_t>& adj_offsets() const { return adj_off_; }
  const std::vector<std::uint32_t>& adj_targets() const { return adj_to_; }
  const std::vector<double>& adj_weights() const { return adj_w_; }

  /// Sum of loop weights at v (each loop slot counted once).
  double loop_weight(std::uint32_t v) const { return loops_.empty() ? 0.0 : loops_[v]; }
  bool has_loops() const { return !loops_.empty(); }

  /// Effective weight summed over all slots between i and j, plus offset.
  double weight(std::uint32_t i, std::uint32_t j) const;

  /// Number of slots joining i and j.
  std::uint32_t multiplicity(std::uint32_t i, std::uint32_t j) const;

  std::uint64_t edge_slots() const { return dense_ ? 0 : edges_.size(); }

  /// Mean of the effective entries under the generating ensemble, when known.
  std::optional<double> ensemble_mean() const { return mean_; }

  friend WeightedGraph center_weights(const WeightedGraph& g, std::optional<double> mu);
  friend WeightedGraph scale_weights(const WeightedGraph& g, double k);
  friend WeightedGraph gen(Model model, std::uint32_t n, double d, Interaction inter, std::uint64_t seed);
  friend WeightedGraph gen_dense(DenseKind kind, std::uint32_t n, std::uint64_t seed);

 private:
  void build_adjacency();

  std::uint32_t n_ = 0;
  double norm_param_ = 1.0;
  Model model_ = Model::gnp;
  Interaction interaction_ = Interaction::custom;
  bool dense_ = false;
  bool centered_ = false;
  double offset_ = 0.0;
  std::optional<double> mean_;
  std::vector<Edge> edges_;
  std::vector<double> matrix_;
  std::vector<std::uint64_t> adj_off_;
  std::vector<std::uint32_t> adj_to_;
  std::vector<double> adj_w_;
  std::vector<double> loops_;
};

/// Random graph from one of the sparse ensembles with average degree d.
WeightedGraph gen(Model model, std::uint32_t n, double d, Interaction inter, std::uint64_t seed);

/// Dense symmetric matrix ensemble; norm_param = n.
WeightedGraph gen_dense(DenseKind kind, std::uint32_t n, std::uint64_t seed);

/// Subtract the ensemble mean mu from every potential entry (kept implicit as
/// a rank-one offset). Throws ParameterError when mu is unknown and absent.
WeightedGraph center_weights(const WeightedGraph& g, std::optional<double> mu = std::nullopt);

/// Multiply every weight (and the offset) by k != 0.
WeightedGraph scale_weights(const WeightedGraph& g, double k);

/// TSV: header "#n=<n> norm=<norm> model=<tag>" then "i<TAB>j<TAB>w" per
/// slot, i <= j. Dense graphs list their non-zero upper-triangle entries. A
/// non-zero offset is appended to the header as " offset=<v>".
void write_tsv(const WeightedGraph& g, std::ostream& os);
WeightedGraph read_tsv(std::istream& is);

}  // namespace hstab
