#include "hstab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hstab/errors.hpp"
#include "hstab/rng.hpp"

namespace hstab {

namespace {

void check_sizes(const SpinConfig& sigma, const WeightedGraph& g) {
  if (sigma.n() != g.n()) throw ParameterError("spin configuration and graph sizes differ");
}

double positive_part(double t) { return t > 0.0 ? t : 0.0; }

}  // namespace

SpinConfig::SpinConfig(const WeightedGraph& g, std::vector<std::int8_t> spins) : spins_(std::move(spins)) {
  if (spins_.size() != g.n()) throw ParameterError("spin vector length must equal n");
  for (auto s : spins_)
    if (s != 1 && s != -1) throw ParameterError("spins must be +1 or -1");
  recompute(g);
}

SpinConfig SpinConfig::random(const WeightedGraph& g, Philox& rng) {
  std::vector<std::int8_t> s(g.n());
  for (auto& x : s) x = rng.coin() ? 1 : -1;
  return SpinConfig(g, std::move(s));
}

SpinConfig SpinConfig::random_bisection(const WeightedGraph& g, Philox& rng) {
  const std::uint32_t n = g.n();
  std::vector<std::int8_t> s(n);
  for (std::uint32_t i = 0; i < n; ++i) s[i] = i < n / 2 ? 1 : -1;
  if (n % 2 == 1 && rng.coin()) s[n - 1] = 1;
  // Fisher-Yates with the project generator keeps the draw platform-independent.
  for (std::uint32_t i = n; i > 1; --i) std::swap(s[i - 1], s[rng.below(i)]);
  return SpinConfig(g, std::move(s));
}

void SpinConfig::recompute(const WeightedGraph& g) {
  const std::uint32_t n = g.n();
  fields_.assign(n, 0.0);
  mag_ = 0;
  for (auto s : spins_) mag_ += s;
  if (g.is_dense()) {
    const auto& a = g.matrix();
    for (std::uint32_t i = 0; i < n; ++i) {
      const double* row = a.data() + static_cast<std::size_t>(i) * n;
      double f = 0.0;
      for (std::uint32_t j = 0; j < n; ++j) f += row[j] * spins_[j];
      fields_[i] = f;
    }
  } else {
    const auto& off = g.adj_offsets();
    const auto& to = g.adj_targets();
    const auto& w = g.adj_weights();
    for (std::uint32_t i = 0; i < n; ++i) {
      double f = 0.0;
      for (auto k = off[i]; k < off[i + 1]; ++k) f += w[k] * spins_[to[k]];
      fields_[i] = f;
    }
  }
}

void SpinConfig::flip(const WeightedGraph& g, std::uint32_t v) {
  const double delta = -2.0 * spins_[v];
  spins_[v] = static_cast<std::int8_t>(-spins_[v]);
  mag_ += static_cast<long long>(delta);
  if (g.is_dense()) {
    const std::uint32_t n = g.n();
    const double* row = g.matrix().data() + static_cast<std::size_t>(v) * n;
    for (std::uint32_t j = 0; j < n; ++j) fields_[j] += row[j] * delta;
  } else {
    const auto& off = g.adj_offsets();
    const auto& to = g.adj_targets();
    const auto& w = g.adj_weights();
    for (auto k = off[v]; k < off[v + 1]; ++k) fields_[to[k]] += w[k] * delta;
  }
}

double SpinConfig::cache_drift(const WeightedGraph& g) const {
  SpinConfig fresh = *this;
  fresh.recompute(g);
  double worst = static_cast<double>(std::llabs(fresh.mag_ - mag_));
  for (std::size_t i = 0; i < fields_.size(); ++i) worst = std::max(worst, std::abs(fresh.fields_[i] - fields_[i]));
  return worst;
}

double effective_field(std::uint32_t v, const SpinConfig& sigma, const WeightedGraph& g) {
  return sigma.local_field(v) + 2.0 * g.loop_weight(v) * sigma.spin(v) +
         g.offset() * static_cast<double>(sigma.magnetization());
}

double stability_of(std::uint32_t v, const SpinConfig& sigma, const WeightedGraph& g) {
  check_sizes(sigma, g);
  if (v >= g.n()) throw ParameterError("vertex out of range");
  return sigma.spin(v) * effective_field(v, sigma, g) / std::sqrt(g.norm_param());
}

std::vector<double> stabilities(const SpinConfig& sigma, const WeightedGraph& g) {
  check_sizes(sigma, g);
  std::vector<double> s(g.n());
  const double inv = 1.0 / std::sqrt(g.norm_param());
  for (std::uint32_t v = 0; v < g.n(); ++v) s[v] = sigma.spin(v) * effective_field(v, sigma, g) * inv;
  return s;
}

double hamiltonian(const SpinConfig& sigma, const WeightedGraph& g) {
  check_sizes(sigma, g);
  CompensatedSum pairs;
  for (std::uint32_t v = 0; v < g.n(); ++v) pairs.add(0.5 * sigma.spin(v) * sigma.local_field(v));
  double loops = 0.0;
  if (g.has_loops())
    for (std::uint32_t v = 0; v < g.n(); ++v) loops += g.loop_weight(v);
  const double m = static_cast<double>(sigma.magnetization());
  const double offset_pairs = g.offset() == 0.0 ? 0.0 : g.offset() * 0.5 * (m * m - g.n());
  return -(pairs.value() + loops + offset_pairs) / std::sqrt(g.norm_param());
}

double energy(const SpinConfig& sigma, const WeightedGraph& g) { return hamiltonian(sigma, g) / g.n(); }

double flip_delta_h(std::uint32_t v, const SpinConfig& sigma, const WeightedGraph& g) {
  const double s = sigma.spin(v);
  const double m_rest = static_cast<double>(sigma.magnetization()) - s;
  return 2.0 * s * (sigma.local_field(v) + g.offset() * m_rest) / std::sqrt(g.norm_param());
}

double deficit(const SpinConfig& sigma, const WeightedGraph& g, double h) {
  CompensatedSum d;
  for (double s : stabilities(sigma, g)) d.add(positive_part(h - s));
  return d.value();
}

double trunc_deficit(const SpinConfig& sigma, const WeightedGraph& g, double h) {
  CompensatedSum d;
  for (double s : stabilities(sigma, g)) d.add(std::min(positive_part(h - s), 1.0));
  return d.value();
}

double deficit_ge_E(const SpinConfig& sigma, const WeightedGraph& g, double h, double E) {
  return deficit(sigma, g, h) + positive_part(g.n() * E - hamiltonian(sigma, g));
}

double deficit_le_E(const SpinConfig& sigma, const WeightedGraph& g, double h, double E) {
  return deficit(sigma, g, h) + positive_part(hamiltonian(sigma, g) - g.n() * E);
}

CutX cut_and_x(const SpinConfig& sigma, const WeightedGraph& g) {
  check_sizes(sigma, g);
  std::uint64_t cut = 0;
  if (g.is_dense()) {
    const std::uint32_t n = g.n();
    for (std::uint32_t i = 0; i < n; ++i)
      for (std::uint32_t j = i + 1; j < n; ++j)
        if (sigma.spin(i) != sigma.spin(j) && g.matrix()[static_cast<std::size_t>(i) * n + j] != 0.0) ++cut;
  } else {
    for (const auto& e : g.edges())
      if (sigma.spin(e.i) != sigma.spin(e.j)) ++cut;
  }
  const double d = g.norm_param();
  const double x = (static_cast<double>(cut) / g.n() - d / 4.0) / std::sqrt(d / 2.0);
  return {cut, x};
}

StabilityReport stability_report(const SpinConfig& sigma, const WeightedGraph& g, double h) {
  StabilityReport r;
  r.n = g.n();
  r.h = h;
  r.s = stabilities(sigma, g);
  CompensatedSum d, t;
  r.min_s = r.s.empty() ? 0.0 : r.s[0];
  for (double s : r.s) {
    if (s >= h) ++r.N;
    d.add(positive_part(h - s));
    t.add(std::min(positive_part(h - s), 1.0));
    r.min_s = std::min(r.min_s, s);
  }
  r.D = d.value();
  r.T = t.value();
  r.H = hamiltonian(sigma, g);
  r.E = r.H / g.n();
  const auto cx = cut_and_x(sigma, g);
  r.cut = cx.cut;
  r.x_param = cx.x;
  return r;
}

nlohmann::json to_json(const StabilityReport& r) {
  return {{"n", r.n}, {"h", r.h}, {"N", r.N}, {"D", r.D}, {"T", r.T},
          {"H", r.H}, {"E", r.E}, {"cut", r.cut}, {"x", r.x_param}};
}

}  // namespace hstab
