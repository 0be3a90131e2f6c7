#include "hstab/search.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "hstab/errors.hpp"
#include "hstab/parallel.hpp"
#include "hstab/rng.hpp"

namespace hstab {

namespace {

constexpr double kImprove = 1e-12;

double hinge(double t) { return t > 0.0 ? t : 0.0; }

// Incremental evaluator for one- and two-spin moves. propose() scores a move
// without changing state; commit() applies the last proposal.
class MoveEvaluator {
 public:
  MoveEvaluator(const WeightedGraph& g, double h, SpinConfig sigma, double epsilon1)
      : g_(g), h_(h), eps_(epsilon1), inv_sqrt_(1.0 / std::sqrt(g.norm_param())), sigma_(std::move(sigma)),
        dlf_(g.n(), 0.0), mark_(g.n(), 0) {
    resync();
  }

  void resync() {
    s_ = stabilities(sigma_, g_);
    soft_.assign(s_.size(), 0.0);
    CompensatedSum d, sf;
    N_ = 0;
    for (std::size_t v = 0; v < s_.size(); ++v) {
      d.add(hinge(h_ - s_[v]));
      if (eps_ > 0.0) {
        soft_[v] = softplus(h_ - s_[v], eps_);
        sf.add(soft_[v]);
      }
      if (s_[v] >= h_) ++N_;
    }
    D_ = d.value();
    soft_sum_ = sf.value();
  }

  void propose(std::uint32_t u) {
    moved_[0] = u;
    count_ = 1;
    evaluate();
  }
  void propose(std::uint32_t u, std::uint32_t v) {
    moved_[0] = u;
    moved_[1] = v;
    count_ = 2;
    evaluate();
  }

  double delta_D() const { return dD_; }
  double delta_soft() const { return dSoft_; }
  double delta_H() const { return dH_; }

  void commit() {
    for (int k = 0; k < count_; ++k) sigma_.flip(g_, moved_[k]);
    for (std::size_t k = 0; k < touched_.size(); ++k) {
      const auto w = touched_[k];
      s_[w] = new_s_[k];
      if (eps_ > 0.0) soft_[w] = new_soft_[k];
    }
    D_ += dD_;
    soft_sum_ += dSoft_;
    N_ = static_cast<std::uint32_t>(static_cast<long long>(N_) + dN_);
  }

  const SpinConfig& sigma() const { return sigma_; }
  const std::vector<double>& s() const { return s_; }
  double D() const { return D_; }
  double soft_sum() const { return soft_sum_; }
  std::uint32_t N() const { return N_; }

 private:
  void touch(std::uint32_t w) {
    if (mark_[w] != epoch_) {
      mark_[w] = epoch_;
      touched_.push_back(w);
    }
  }

  bool is_moved(std::uint32_t w) const {
    return moved_[0] == w || (count_ == 2 && moved_[1] == w);
  }

  void evaluate() {
    ++epoch_;
    touched_.clear();
    new_s_.clear();
    new_soft_.clear();
    const std::uint32_t n = g_.n();
    const double off = g_.offset();
    long long M = sigma_.magnetization();
    dH_ = 0.0;

    // Sequential flips: the energy change of the second spin sees the first.
    double dM = 0.0;
    for (int k = 0; k < count_; ++k) {
      const auto m = moved_[k];
      const double sm = sigma_.spin(m);
      double lf = sigma_.local_field(m);
      if (k == 1) {
        const auto first = moved_[0];
        lf += g_.is_dense() ? g_.matrix()[static_cast<std::size_t>(m) * n + first] * (-2.0 * sigma_.spin(first))
                            : dlf_[m];
      }
      dH_ += 2.0 * sm * (lf + off * static_cast<double>(M - static_cast<long long>(sm))) * inv_sqrt_;
      M -= 2 * static_cast<long long>(sm);
      dM -= 2.0 * sm;
      if (!g_.is_dense()) {
        const auto& ao = g_.adj_offsets();
        const auto& to = g_.adj_targets();
        const auto& aw = g_.adj_weights();
        const double delta = -2.0 * sm;
        for (auto q = ao[m]; q < ao[m + 1]; ++q) {
          dlf_[to[q]] += aw[q] * delta;
          touch(to[q]);
        }
      }
    }
    for (int k = 0; k < count_; ++k) touch(moved_[k]);
    const double m_new = static_cast<double>(M);

    dD_ = 0.0;
    dSoft_ = 0.0;
    dN_ = 0;
    auto score = [&](std::uint32_t w, double lf_new) {
      const double sw = is_moved(w) ? -sigma_.spin(w) : sigma_.spin(w);
      const double s_new = sw * (lf_new + 2.0 * g_.loop_weight(w) * sw + off * m_new) * inv_sqrt_;
      const double s_old = s_[w];
      dD_ += hinge(h_ - s_new) - hinge(h_ - s_old);
      dN_ += static_cast<int>(s_new >= h_) - static_cast<int>(s_old >= h_);
      new_s_.push_back(s_new);
      if (eps_ > 0.0) {
        const double gs = softplus(h_ - s_new, eps_);
        dSoft_ += gs - soft_[w];
        new_soft_.push_back(gs);
      }
    };

    if (g_.is_dense()) {
      touched_.clear();
      const double* r0 = g_.matrix().data() + static_cast<std::size_t>(moved_[0]) * n;
      const double d0 = -2.0 * sigma_.spin(moved_[0]);
      const double* r1 = count_ == 2 ? g_.matrix().data() + static_cast<std::size_t>(moved_[1]) * n : nullptr;
      const double d1 = count_ == 2 ? -2.0 * sigma_.spin(moved_[1]) : 0.0;
      touched_.reserve(n);
      for (std::uint32_t w = 0; w < n; ++w) {
        double lf = sigma_.local_field(w) + r0[w] * d0;
        if (r1) lf += r1[w] * d1;
        touched_.push_back(w);
        score(w, lf);
      }
    } else if (off != 0.0 && dM != 0.0) {
      // The offset couples every vertex through M.
      std::vector<std::uint32_t> local = touched_;
      touched_.clear();
      for (std::uint32_t w = 0; w < n; ++w) {
        touched_.push_back(w);
        score(w, sigma_.local_field(w) + dlf_[w]);
      }
      for (auto w : local) dlf_[w] = 0.0;
      return;
    } else {
      for (auto w : touched_) score(w, sigma_.local_field(w) + dlf_[w]);
    }
    if (!g_.is_dense())
      for (auto w : touched_) dlf_[w] = 0.0;
  }

  const WeightedGraph& g_;
  double h_;
  double eps_;
  double inv_sqrt_;
  SpinConfig sigma_;
  std::vector<double> s_;
  std::vector<double> soft_;
  double D_ = 0.0;
  double soft_sum_ = 0.0;
  std::uint32_t N_ = 0;

  std::vector<double> dlf_;
  std::vector<std::uint64_t> mark_;
  std::uint64_t epoch_ = 0;
  std::vector<std::uint32_t> touched_;
  std::vector<double> new_s_;
  std::vector<double> new_soft_;
  std::uint32_t moved_[2] = {0, 0};
  int count_ = 1;
  double dD_ = 0.0;
  double dSoft_ = 0.0;
  double dH_ = 0.0;
  int dN_ = 0;
};

SearchResult finish(const WeightedGraph& g, double h, std::vector<std::int8_t> spins,
                    std::optional<EnergyConstraint> constraint) {
  SearchResult r;
  r.best_sigma = SpinConfig(g, std::move(spins));
  r.best_report = stability_report(r.best_sigma, g, h);
  r.best_deficit = r.best_report.D;
  if (constraint) {
    const double gap = constraint->direction == EnergyDirection::ge ? g.n() * constraint->E - r.best_report.H
                                                                     : r.best_report.H - g.n() * constraint->E;
    r.best_deficit += hinge(gap);
  }
  return r;
}

void descend_single(MoveEvaluator& ev, std::uint32_t n) {
  while (true) {
    std::int64_t best = -1;
    double best_d = -kImprove;
    for (std::uint32_t v = 0; v < n; ++v) {
      ev.propose(v);
      if (ev.delta_D() < best_d) {
        best_d = ev.delta_D();
        best = v;
      }
    }
    if (best < 0) return;
    ev.propose(static_cast<std::uint32_t>(best));
    ev.commit();
  }
}

void descend_swap(MoveEvaluator& ev, std::uint32_t n) {
  while (true) {
    std::vector<std::uint32_t> plus, minus;
    if (n <= kExactSwapLimit) {
      for (std::uint32_t v = 0; v < n; ++v) (ev.sigma().spin(v) > 0 ? plus : minus).push_back(v);
    } else {
      std::vector<std::pair<double, std::uint32_t>> cp, cm;
      for (std::uint32_t v = 0; v < n; ++v) {
        ev.propose(v);
        (ev.sigma().spin(v) > 0 ? cp : cm).push_back({ev.delta_D(), v});
      }
      auto keep = [](auto& c, auto& out) {
        const std::size_t k = std::min<std::size_t>(kSwapCandidates, c.size());
        std::partial_sort(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(k), c.end());
        for (std::size_t i = 0; i < k; ++i) out.push_back(c[i].second);
        std::sort(out.begin(), out.end());
      };
      keep(cp, plus);
      keep(cm, minus);
    }
    double best_d = -kImprove;
    std::int64_t bu = -1, bv = -1;
    for (auto u : plus)
      for (auto v : minus) {
        ev.propose(u, v);
        if (ev.delta_D() < best_d) {
          best_d = ev.delta_D();
          bu = u;
          bv = v;
        }
      }
    if (bu < 0) return;
    ev.propose(static_cast<std::uint32_t>(bu), static_cast<std::uint32_t>(bv));
    ev.commit();
  }
}

// Flip unstable vertices whose flip lowers H, steepest first. Terminates
// because H strictly decreases.
void repair_unstable(MoveEvaluator& ev, std::uint32_t n) {
  while (true) {
    std::int64_t best = -1;
    double best_dh = -kImprove;
    for (std::uint32_t v = 0; v < n; ++v) {
      if (!(ev.s()[v] < 0.0)) continue;
      ev.propose(v);
      if (ev.delta_H() < best_dh) {
        best_dh = ev.delta_H();
        best = v;
      }
    }
    if (best < 0) return;
    ev.propose(static_cast<std::uint32_t>(best));
    ev.commit();
  }
}

}  // namespace

std::string_view move_name(MoveKind m) { return m == MoveKind::single_flip ? "single_flip" : "swap_pair"; }

MoveKind parse_move(std::string_view s) {
  if (s == "single_flip" || s == "flip") return MoveKind::single_flip;
  if (s == "swap_pair" || s == "swap") return MoveKind::swap_pair;
  throw ParameterError("unknown move kind: " + std::string(s));
}

void AnnealSchedule::validate() const {
  if (!(rho_start > 0.0) || !(rho_end >= rho_start)) throw ParameterError("anneal: need rho_end >= rho_start > 0");
  if (!(epsilon1 > 0.0)) throw ParameterError("anneal: epsilon1 must be positive");
  if (steps < 1) throw ParameterError("anneal: steps must be >= 1");
}

double AnnealSchedule::rho_at(int step) const {
  if (steps == 1) return rho_end;
  const double f = static_cast<double>(step) / (steps - 1);
  return rho_start * std::pow(rho_end / rho_start, f);
}

double softplus(double t, double epsilon1) {
  const double gamma = epsilon1 / std::numbers::ln2;
  const double z = t / gamma;
  return std::max(t, 0.0) + gamma * std::log1p(std::exp(-std::abs(z)));
}

double acceptance_probability(double rho, double delta) {
  return delta <= 0.0 ? 1.0 : std::exp(-rho * delta);
}

SearchResult greedy_descent(const WeightedGraph& g, double h, const SpinConfig& sigma0, MoveKind move) {
  if (sigma0.n() != g.n()) throw ParameterError("greedy: initial configuration size mismatch");
  if (move == MoveKind::swap_pair && !sigma0.is_bisection())
    throw ParameterError("greedy: swap_pair needs a bisection start");
  MoveEvaluator ev(g, h, sigma0, 0.0);
  const std::uint32_t n = g.n();
  if (move == MoveKind::swap_pair) {
    descend_swap(ev, n);
    return finish(g, h, ev.sigma().spins(), std::nullopt);
  }
  descend_single(ev, n);
  if (h > 0.0) return finish(g, h, ev.sigma().spins(), std::nullopt);

  const auto first = ev.sigma().spins();
  const double first_d = ev.D();
  repair_unstable(ev, n);
  descend_single(ev, n);
  if (ev.D() <= first_d) return finish(g, h, ev.sigma().spins(), std::nullopt);
  return finish(g, h, first, std::nullopt);
}

SearchResult greedy_restarts(const WeightedGraph& g, double h, MoveKind move, int restarts, std::uint64_t seed) {
  if (restarts < 1) throw ParameterError("greedy: restarts must be >= 1");
  std::optional<SearchResult> best;
  for (int r = 0; r < restarts; ++r) {
    Philox rng(seed, static_cast<std::uint64_t>(r));
    const auto start = move == MoveKind::swap_pair ? SpinConfig::random_bisection(g, rng) : SpinConfig::random(g, rng);
    auto res = greedy_descent(g, h, start, move);
    if (!best || res.best_deficit < best->best_deficit) best = std::move(res);
  }
  best->restarts = restarts;
  best->rng_seed = seed;
  return *best;
}

SearchResult anneal(const WeightedGraph& g, double h, const AnnealSchedule& schedule, std::uint64_t seed,
                    std::optional<EnergyConstraint> constraint, bool record_trajectory, const SpinConfig* init) {
  schedule.validate();
  Philox rng(seed, 0);
  const std::uint32_t n = g.n();
  const bool swap = schedule.move_kind == MoveKind::swap_pair;
  SpinConfig start = init ? *init : (swap ? SpinConfig::random_bisection(g, rng) : SpinConfig::random(g, rng));
  if (start.n() != n) throw ParameterError("anneal: initial configuration size mismatch");
  if (swap && !start.is_bisection()) throw ParameterError("anneal: swap_pair needs a bisection start");

  MoveEvaluator ev(g, h, std::move(start), schedule.epsilon1);
  double H = hamiltonian(ev.sigma(), g);
  const double nE = constraint ? n * constraint->E : 0.0;
  auto gap_of = [&](double HH) {
    if (!constraint) return 0.0;
    return constraint->direction == EnergyDirection::ge ? nE - HH : HH - nE;
  };
  auto soft_extra = [&](double HH) { return constraint ? softplus(gap_of(HH), schedule.epsilon1) : 0.0; };
  auto hard = [&](double D, double HH) { return D + hinge(gap_of(HH)); };

  // Index lists of the two parts for O(1) pair sampling.
  std::vector<std::uint32_t> plus, minus, pos(n);
  if (swap) {
    for (std::uint32_t v = 0; v < n; ++v) {
      auto& side = ev.sigma().spin(v) > 0 ? plus : minus;
      pos[v] = static_cast<std::uint32_t>(side.size());
      side.push_back(v);
    }
  }

  std::vector<std::int8_t> best_spins = ev.sigma().spins();
  double best = hard(ev.D(), H);
  SearchResult out;

  for (int step = 0; step < schedule.steps; ++step) {
    const double rho = schedule.rho_at(step);
    for (std::uint32_t k = 0; k < n; ++k) {
      std::uint32_t u = 0, v = 0;
      if (swap) {
        if (plus.empty() || minus.empty()) break;
        u = plus[rng.below(plus.size())];
        v = minus[rng.below(minus.size())];
        ev.propose(u, v);
      } else {
        u = static_cast<std::uint32_t>(rng.below(n));
        ev.propose(u);
      }
      const double H_new = H + ev.delta_H();
      const double dS = ev.delta_soft() + soft_extra(H_new) - soft_extra(H);
      const bool accept = dS <= 0.0 || rng.uniform() < acceptance_probability(rho, dS);
      if (!accept) continue;
      ev.commit();
      H = H_new;
      if (swap) {
        // u joins the minus side and v the plus side, reusing their slots.
        plus[pos[u]] = v;
        minus[pos[v]] = u;
        std::swap(pos[u], pos[v]);
      }
      const double cur = hard(ev.D(), H);
      if (cur < best - kImprove) {
        best = cur;
        best_spins = ev.sigma().spins();
      }
    }
    // Drop accumulated rounding once per sweep.
    ev.resync();
    H = hamiltonian(ev.sigma(), g);
    const double cur = hard(ev.D(), H);
    if (cur < best - kImprove) {
      best = cur;
      best_spins = ev.sigma().spins();
    }
    if (record_trajectory)
      out.trajectory.push_back({step, rho, ev.soft_sum() + soft_extra(H), cur, ev.N(), H / n});
  }

  auto res = finish(g, h, std::move(best_spins), constraint);
  res.trajectory = std::move(out.trajectory);
  res.rng_seed = seed;
  res.restarts = 1;
  return res;
}

void write_trajectory_csv(const SearchResult& r, std::ostream& os) {
  os << "step,rho,soft_deficit,hard_deficit,N,E\n";
  char buf[192];
  for (const auto& p : r.trajectory) {
    std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g,%u,%.12g\n", p.step, p.rho, p.soft_deficit, p.hard_deficit,
                  p.N, p.E);
    os << buf;
  }
}

EnsembleSpec parse_ensemble(std::string_view s) {
  EnsembleSpec e;
  e.label = std::string(s);
  if (s == "dense_gaussian") {
    e.model = Model::dense_gaussian;
    e.interaction = Interaction::custom;
    return e;
  }
  const auto colon = s.find(':');
  if (colon == std::string_view::npos) {
    e.model = Model::gnp;
    e.interaction = parse_interaction(s);
  } else {
    e.model = parse_model(s.substr(0, colon));
    e.interaction = parse_interaction(s.substr(colon + 1));
  }
  if (is_dense(e.model)) throw ParameterError("ensemble: dense models take no interaction");
  if (e.interaction == Interaction::custom) throw ParameterError("ensemble: interaction must be fixed");
  return e;
}

WeightedGraph universality_graph(const EnsembleSpec& e, std::uint32_t n, double d, std::uint64_t seed,
                                 double* scale_out) {
  double k = 1.0;
  WeightedGraph g;
  if (e.model == Model::dense_gaussian) {
    g = center_weights(gen_dense(DenseKind::gaussian, n, seed));
  } else {
    g = gen(e.model, n, d, e.interaction, seed);
    const double mu = g.ensemble_mean().value_or(0.0);
    g = center_weights(g);
    // Centered +-1 entries with mean mu have variance |mu|(1 - |mu|); rescale
    // to the |mu| of the zero-mean spin-glass ensemble.
    const double p = std::abs(mu);
    if (p > 0.0 && p < 1.0) {
      k = 1.0 / std::sqrt(1.0 - p);
      g = scale_weights(g, k);
    }
  }
  if (scale_out) *scale_out = k;
  return g;
}

UniversalityTable universality_sweep(const std::vector<EnsembleSpec>& models, std::uint32_t n,
                                     const std::vector<double>& d_grid, const std::vector<double>& h_grid,
                                     int seeds, std::uint64_t seed, const AnnealSchedule& schedule, int jobs) {
  if (models.empty() || d_grid.empty() || h_grid.empty()) throw ParameterError("universality: empty grid");
  if (seeds < 1) throw ParameterError("universality: seeds must be >= 1");
  schedule.validate();
  AnnealSchedule sched = schedule;
  sched.move_kind = MoveKind::swap_pair;

  struct Task {
    std::size_t model, d, h;
    int s;
  };
  std::vector<Task> tasks;
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    const bool dense = models[mi].model == Model::dense_gaussian;
    for (std::size_t di = 0; di < (dense ? 1 : d_grid.size()); ++di)
      for (std::size_t hi = 0; hi < h_grid.size(); ++hi)
        for (int s = 0; s < seeds; ++s) tasks.push_back({mi, di, hi, s});
  }
  struct Outcome {
    double D = 0.0, N = 0.0, scale = 1.0;
  };
  std::vector<Outcome> results(tasks.size());
  parallel_for(tasks.size(), jobs, [&](std::size_t i) {
    const auto& t = tasks[i];
    const std::uint64_t gseed = mix64(seed ^ mix64((t.model + 1) * 0x100000001B3ull + t.d * 0x9E37ull + t.s));
    double k = 1.0;
    const auto g = universality_graph(models[t.model], n, d_grid[t.d], gseed, &k);
    const auto r = anneal(g, h_grid[t.h], sched, mix64(gseed + 1 + t.h));
    results[i] = {r.best_report.D / n, static_cast<double>(r.best_report.N) / n, k};
  });

  UniversalityTable table;
  for (std::size_t di = 0; di < d_grid.size(); ++di)
    for (std::size_t hi = 0; hi < h_grid.size(); ++hi) {
      std::vector<double> means;
      for (std::size_t mi = 0; mi < models.size(); ++mi) {
        const bool dense = models[mi].model == Model::dense_gaussian;
        std::vector<double> Ds, Ns;
        double scale = 1.0;
        for (std::size_t i = 0; i < tasks.size(); ++i)
          if (tasks[i].model == mi && tasks[i].h == hi && tasks[i].d == (dense ? 0 : di)) {
            Ds.push_back(results[i].D);
            Ns.push_back(results[i].N);
            scale = results[i].scale;
          }
        auto stats = [](const std::vector<double>& v) {
          double m = 0.0;
          for (double x : v) m += x;
          m /= static_cast<double>(v.size());
          double ss = 0.0;
          for (double x : v) ss += (x - m) * (x - m);
          const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
          return std::pair{m, sd};
        };
        const auto [mD, sD] = stats(Ds);
        const auto [mN, sN] = stats(Ns);
        table.rows.push_back({models[mi].label, d_grid[di], h_grid[hi], seeds, mD, sD, mN, sN, scale});
        means.push_back(mD);
      }
      double gap = 0.0;
      for (std::size_t a = 0; a < means.size(); ++a)
        for (std::size_t b = a + 1; b < means.size(); ++b) gap = std::max(gap, std::abs(means[a] - means[b]));
      table.gaps.push_back({d_grid[di], h_grid[hi], gap});
    }
  return table;
}

}  // namespace hstab
