#include "hstab/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "hstab/errors.hpp"
#include "hstab/rng.hpp"

namespace hstab {

namespace {

constexpr std::uint64_t kEdgeStream = 1;
constexpr std::uint64_t kSignStream = 2;

double interaction_sign(Interaction inter, Philox& rng) {
  switch (inter) {
    case Interaction::ferro:
      return 1.0;
    case Interaction::antiferro:
      return -1.0;
    case Interaction::dilute_spin_glass:
      return rng.coin() ? 1.0 : -1.0;
    case Interaction::custom:
      break;
  }
  throw ParameterError("random graph generation needs ferro, antiferro or dilute_spin_glass interaction");
}

double interaction_mean(Interaction inter) {
  switch (inter) {
    case Interaction::ferro:
      return 1.0;
    case Interaction::antiferro:
      return -1.0;
    default:
      return 0.0;
  }
}

// Slot index k -> (i, j) in the upper triangle, row i holding L - i entries
// (L = n with the diagonal, n - 1 without).
std::pair<std::uint32_t, std::uint32_t> decode_pair(std::uint64_t k, std::uint64_t n, bool diagonal) {
  const double L = diagonal ? static_cast<double>(n) : static_cast<double>(n - 1);
  auto start = [&](std::uint64_t i) { return i * static_cast<std::uint64_t>(L) - i * (i - 1) / 2; };
  const double disc = (2 * L + 1) * (2 * L + 1) - 8.0 * static_cast<double>(k);
  auto i = static_cast<std::uint64_t>(std::max(0.0, std::floor(((2 * L + 1) - std::sqrt(std::max(disc, 0.0))) / 2)));
  while (i > 0 && start(i) > k) --i;
  while (start(i + 1) <= k && i + 1 < n) ++i;
  const std::uint64_t j = k - start(i) + i + (diagonal ? 0 : 1);
  return {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)};
}

// m distinct keys from [0, total), sorted.
std::vector<std::uint64_t> distinct_keys(std::uint64_t total, std::uint64_t m, Philox& rng) {
  std::vector<std::uint64_t> keys;
  if (m * 2 <= total) {
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(m * 2);
    keys.reserve(m);
    while (keys.size() < m) {
      const auto k = rng.below(total);
      if (seen.insert(k).second) keys.push_back(k);
    }
  } else {
    // Dense regime: draw the complement instead.
    std::unordered_set<std::uint64_t> skip;
    const std::uint64_t c = total - m;
    skip.reserve(c * 2);
    while (skip.size() < c) skip.insert(rng.below(total));
    keys.reserve(m);
    for (std::uint64_t k = 0; k < total; ++k)
      if (!skip.count(k)) keys.push_back(k);
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

void check_sparse(std::uint32_t n, double d) {
  if (n < 2) throw ParameterError("graph needs n >= 2");
  if (!(d > 0.0 && d < n)) throw ParameterError("sparse ensembles need 0 < d < n");
}

}  // namespace

std::string_view model_name(Model m) {
  switch (m) {
    case Model::gnp: return "gnp";
    case Model::gnm: return "gnm";
    case Model::gnp_loops: return "gnp_loops";
    case Model::gnm_loops: return "gnm_loops";
    case Model::config_model: return "config_model";
    case Model::dense_gaussian: return "dense_gaussian";
    case Model::dense_bernoulli: return "dense_bernoulli";
  }
  return "unknown";
}

Model parse_model(std::string_view s) {
  for (Model m : {Model::gnp, Model::gnm, Model::gnp_loops, Model::gnm_loops, Model::config_model,
                  Model::dense_gaussian, Model::dense_bernoulli})
    if (model_name(m) == s) return m;
  throw ParameterError("unknown model tag: " + std::string(s));
}

std::string_view interaction_name(Interaction i) {
  switch (i) {
    case Interaction::ferro: return "ferro";
    case Interaction::antiferro: return "antiferro";
    case Interaction::dilute_spin_glass: return "dilute_spin_glass";
    case Interaction::custom: return "custom";
  }
  return "unknown";
}

Interaction parse_interaction(std::string_view s) {
  for (Interaction i :
       {Interaction::ferro, Interaction::antiferro, Interaction::dilute_spin_glass, Interaction::custom})
    if (interaction_name(i) == s) return i;
  if (s == "spin_glass") return Interaction::dilute_spin_glass;
  throw ParameterError("unknown interaction: " + std::string(s));
}

bool is_dense(Model m) { return m == Model::dense_gaussian || m == Model::dense_bernoulli; }

WeightedGraph WeightedGraph::sparse(std::uint32_t n, double norm_param, Model model, Interaction inter,
                                    std::vector<Edge> edges) {
  if (n < 1) throw ParameterError("graph needs n >= 1");
  if (!(norm_param > 0.0)) throw ParameterError("normalization parameter must be positive");
  for (const auto& e : edges)
    if (e.i >= n || e.j >= n) throw ParameterError("edge endpoint out of range");
  WeightedGraph g;
  g.n_ = n;
  g.norm_param_ = norm_param;
  g.model_ = model;
  g.interaction_ = inter;
  g.edges_ = std::move(edges);
  g.build_adjacency();
  return g;
}

WeightedGraph WeightedGraph::dense(std::uint32_t n, double norm_param, Model model, Interaction inter,
                                   std::vector<double> matrix) {
  if (matrix.size() != static_cast<std::size_t>(n) * n) throw ParameterError("dense matrix must be n x n");
  if (!(norm_param > 0.0)) throw ParameterError("normalization parameter must be positive");
  for (std::uint32_t i = 0; i < n; ++i) {
    if (matrix[static_cast<std::size_t>(i) * n + i] != 0.0) throw ParameterError("dense matrix needs a zero diagonal");
    for (std::uint32_t j = i + 1; j < n; ++j)
      if (matrix[static_cast<std::size_t>(i) * n + j] != matrix[static_cast<std::size_t>(j) * n + i])
        throw ParameterError("dense matrix must be symmetric");
  }
  WeightedGraph g;
  g.n_ = n;
  g.norm_param_ = norm_param;
  g.model_ = model;
  g.interaction_ = inter;
  g.dense_ = true;
  g.matrix_ = std::move(matrix);
  return g;
}

void WeightedGraph::build_adjacency() {
  std::vector<std::uint64_t> deg(n_ + 1, 0);
  bool any_loop = false;
  for (const auto& e : edges_) {
    if (e.i == e.j) {
      any_loop = true;
      continue;
    }
    ++deg[e.i];
    ++deg[e.j];
  }
  adj_off_.assign(n_ + 1, 0);
  for (std::uint32_t v = 0; v < n_; ++v) adj_off_[v + 1] = adj_off_[v] + deg[v];
  adj_to_.resize(adj_off_[n_]);
  adj_w_.resize(adj_off_[n_]);
  std::vector<std::uint64_t> fill(adj_off_.begin(), adj_off_.end() - 1);
  if (any_loop) loops_.assign(n_, 0.0);
  for (const auto& e : edges_) {
    if (e.i == e.j) {
      loops_[e.i] += e.w;
      continue;
    }
    adj_to_[fill[e.i]] = e.j;
    adj_w_[fill[e.i]++] = e.w;
    adj_to_[fill[e.j]] = e.i;
    adj_w_[fill[e.j]++] = e.w;
  }
}

double WeightedGraph::weight(std::uint32_t i, std::uint32_t j) const {
  if (i >= n_ || j >= n_) throw ParameterError("vertex out of range");
  if (dense_) return matrix_[static_cast<std::size_t>(i) * n_ + j] + offset_;
  if (i == j) return loop_weight(i) + offset_;
  double w = 0.0;
  for (auto k = adj_off_[i]; k < adj_off_[i + 1]; ++k)
    if (adj_to_[k] == j) w += adj_w_[k];
  return w + offset_;
}

std::uint32_t WeightedGraph::multiplicity(std::uint32_t i, std::uint32_t j) const {
  if (dense_) return (i != j && matrix_[static_cast<std::size_t>(i) * n_ + j] != 0.0) ? 1 : 0;
  std::uint32_t m = 0;
  if (i == j) {
    for (const auto& e : edges_)
      if (e.i == i && e.j == i) ++m;
    return m;
  }
  for (auto k = adj_off_[i]; k < adj_off_[i + 1]; ++k)
    if (adj_to_[k] == j) ++m;
  return m;
}

WeightedGraph gen(Model model, std::uint32_t n, double d, Interaction inter, std::uint64_t seed) {
  if (is_dense(model)) throw ParameterError("use gen_dense for dense ensembles");
  check_sparse(n, d);
  if (inter == Interaction::custom) throw ParameterError("random graph generation needs a fixed interaction");

  std::vector<Edge> edges;
  const std::uint64_t m = static_cast<std::uint64_t>(std::floor(d * n / 2.0));
  const double nn = n;
  const double s = interaction_mean(inter);
  double mean = 0.0;

  switch (model) {
    case Model::gnp:
    case Model::gnp_loops: {
      const double p = d / nn;
      const double log_q = std::log1p(-p);
      const bool loops = model == Model::gnp_loops;
      for (std::uint32_t i = 0; i < n; ++i) {
        Philox rng(seed, i);
        if (loops && rng.uniform() < d / (2.0 * nn)) edges.push_back({i, i, interaction_sign(inter, rng)});
        // Geometric skipping over the candidates j > i.
        double j = i;
        while (true) {
          j += 1.0 + std::floor(std::log(rng.uniform_pos()) / log_q);
          if (j >= nn) break;
          edges.push_back({i, static_cast<std::uint32_t>(j), interaction_sign(inter, rng)});
        }
      }
      mean = s * p;
      break;
    }
    case Model::gnm:
    case Model::gnm_loops: {
      const bool loops = model == Model::gnm_loops;
      const std::uint64_t total = loops ? std::uint64_t{n} * (n + 1) / 2 : std::uint64_t{n} * (n - 1) / 2;
      if (m > total) throw ParameterError("gnm: more edges requested than vertex pairs");
      Philox rng(seed, kEdgeStream);
      Philox signs(seed, kSignStream);
      for (auto k : distinct_keys(total, m, rng)) {
        const auto [i, j] = decode_pair(k, n, loops);
        edges.push_back({i, j, interaction_sign(inter, signs)});
      }
      mean = s * static_cast<double>(m) / static_cast<double>(total);
      break;
    }
    case Model::config_model: {
      Philox rng(seed, kEdgeStream);
      Philox signs(seed, kSignStream);
      edges.reserve(m);
      for (std::uint64_t k = 0; k < m; ++k) {
        const auto a = static_cast<std::uint32_t>(rng.below(n));
        const auto b = static_cast<std::uint32_t>(rng.below(n));
        edges.push_back({std::min(a, b), std::max(a, b), interaction_sign(inter, signs)});
      }
      mean = s * 2.0 * static_cast<double>(m) / (nn * nn);
      break;
    }
    default:
      break;
  }
  auto g = WeightedGraph::sparse(n, d, model, inter, std::move(edges));
  g.mean_ = mean;
  return g;
}

WeightedGraph gen_dense(DenseKind kind, std::uint32_t n, std::uint64_t seed) {
  if (n < 2) throw ParameterError("graph needs n >= 2");
  std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
  for (std::uint32_t i = 0; i < n; ++i) {
    Philox rng(seed, i);
    for (std::uint32_t j = i + 1; j < n; ++j) {
      const double w = kind == DenseKind::gaussian ? rng.normal() : (rng.coin() ? 1.0 : 0.0);
      a[static_cast<std::size_t>(i) * n + j] = w;
      a[static_cast<std::size_t>(j) * n + i] = w;
    }
  }
  const Model model = kind == DenseKind::gaussian ? Model::dense_gaussian : Model::dense_bernoulli;
  auto g = WeightedGraph::dense(n, n, model, Interaction::custom, std::move(a));
  g.mean_ = kind == DenseKind::gaussian ? 0.0 : 0.5;
  return g;
}

WeightedGraph center_weights(const WeightedGraph& g, std::optional<double> mu) {
  if (!mu) mu = g.mean_;
  if (!mu) throw ParameterError("center_weights: ensemble mean unknown for this graph; supply mu");
  WeightedGraph out = g;
  out.offset_ -= *mu;
  out.centered_ = true;
  if (out.mean_) *out.mean_ -= *mu;
  return out;
}

WeightedGraph scale_weights(const WeightedGraph& g, double k) {
  if (k == 0.0 || !std::isfinite(k)) throw ParameterError("scale_weights: k must be finite and non-zero");
  WeightedGraph out = g;
  for (auto& e : out.edges_) e.w *= k;
  for (auto& w : out.matrix_) w *= k;
  for (auto& w : out.adj_w_) w *= k;
  for (auto& w : out.loops_) w *= k;
  out.offset_ *= k;
  if (out.mean_) *out.mean_ *= k;
  return out;
}

void write_tsv(const WeightedGraph& g, std::ostream& os) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "#n=%u norm=%.17g model=", g.n(), g.norm_param());
  os << buf << model_name(g.model());
  if (g.offset() != 0.0) {
    std::snprintf(buf, sizeof buf, " offset=%.17g", g.offset());
    os << buf;
  }
  os << '\n';
  auto line = [&](std::uint32_t i, std::uint32_t j, double w) {
    std::snprintf(buf, sizeof buf, "%u\t%u\t%.17g\n", std::min(i, j), std::max(i, j), w);
    os << buf;
  };
  if (g.is_dense()) {
    const auto n = g.n();
    for (std::uint32_t i = 0; i < n; ++i)
      for (std::uint32_t j = i + 1; j < n; ++j) {
        const double w = g.matrix()[static_cast<std::size_t>(i) * n + j];
        if (w != 0.0) line(i, j, w);
      }
  } else {
    for (const auto& e : g.edges()) line(e.i, e.j, e.w);
  }
}

WeightedGraph read_tsv(std::istream& is) {
  std::string header;
  // Manifest lines ("# {...}") written by the CLI may precede the header.
  while (std::getline(is, header) && header.rfind("# {", 0) == 0) {
  }
  if (!is || header.empty() || header[0] != '#')
    throw ParameterError("graph file: missing '#n=... norm=... model=...' header");
  std::istringstream hs(header.substr(1));
  std::string tok;
  long long n = -1;
  double norm = 0.0, offset = 0.0;
  Model model = Model::gnp;
  bool have_model = false;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw ParameterError("graph file: bad header token '" + tok + "'");
    const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    try {
      if (key == "n") n = std::stoll(val);
      else if (key == "norm") norm = std::stod(val);
      else if (key == "model") {
        model = parse_model(val);
        have_model = true;
      } else if (key == "offset") offset = std::stod(val);
    } catch (const std::logic_error&) {
      throw ParameterError("graph file: bad header value '" + tok + "'");
    }
  }
  if (n < 1 || n > static_cast<long long>(UINT32_MAX) || !(norm > 0.0) || !have_model)
    throw ParameterError("graph file: header needs n >= 1, norm > 0 and a model tag");
  const auto nu = static_cast<std::uint32_t>(n);

  std::vector<Edge> edges;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    long long i, j;
    double w;
    if (!(ls >> i >> j >> w) || i < 0 || j < 0 || i >= n || j >= n)
      throw ParameterError("graph file: bad edge on line " + std::to_string(lineno));
    edges.push_back({static_cast<std::uint32_t>(std::min(i, j)), static_cast<std::uint32_t>(std::max(i, j)), w});
  }

  WeightedGraph g;
  if (is_dense(model)) {
    std::vector<double> a(static_cast<std::size_t>(nu) * nu, 0.0);
    for (const auto& e : edges) {
      if (e.i == e.j) throw ParameterError("graph file: dense graphs cannot have loops");
      a[static_cast<std::size_t>(e.i) * nu + e.j] += e.w;
      a[static_cast<std::size_t>(e.j) * nu + e.i] += e.w;
    }
    g = WeightedGraph::dense(nu, norm, model, Interaction::custom, std::move(a));
  } else {
    g = WeightedGraph::sparse(nu, norm, model, Interaction::custom, std::move(edges));
  }
  if (offset != 0.0) g = center_weights(g, -offset);
  return g;
}

}  // namespace hstab
