#include "hstab/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "hstab/calibration.hpp"
#include "hstab/errors.hpp"
#include "hstab/firstmoment.hpp"
#include "hstab/graphs.hpp"
#include "hstab/oracle.hpp"
#include "hstab/parallel.hpp"
#include "hstab/rng.hpp"
#include "hstab/search.hpp"
#include "hstab/secondmoment.hpp"
#include "hstab/stability.hpp"

#ifndef HSTAB_VERSION
#define HSTAB_VERSION "0.0.0"
#endif

namespace hstab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

json round_floats(const json& j) {
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (!std::isfinite(v)) return nullptr;
    return std::strtod(format_number(v).c_str(), nullptr);
  }
  if (j.is_array()) {
    json out = json::array();
    for (const auto& e : j) out.push_back(round_floats(e));
    return out;
  }
  if (j.is_object()) {
    json out = json::object();
    for (const auto& [k, v] : j.items()) out[k] = round_floats(v);
    return out;
  }
  return j;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string cell_text(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

json cell_json(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* i = std::get_if<long long>(&c)) return *i;
  return std::get<std::string>(c);
}

}  // namespace

void Table::write_csv(std::ostream& os) const {
  for (std::size_t k = 0; k < columns.size(); ++k) os << (k ? "," : "") << columns[k];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << cell_text(row[k]);
    os << '\n';
  }
}

json Table::to_json() const {
  json arr = json::array();
  for (const auto& row : rows) {
    json o = json::object();
    for (std::size_t k = 0; k < columns.size(); ++k) o[columns[k]] = cell_json(row[k]);
    arr.push_back(o);
  }
  return arr;
}

namespace {

struct Globals {
  double tol = 1.0;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string cache_dir;
  bool no_cache = false;
  std::string format;
  std::string output = "-";
  bool quiet = false;
};

struct Payload {
  json result = json::object();
  std::optional<Table> table;
};

enum class Fmt { csv, json };

QuadratureSpec quad_of(const Globals& g) {
  QuadratureSpec q;
  q.abs_tol *= g.tol;
  q.rel_tol *= g.tol;
  q.validate();
  return q;
}

ECorOptions ecor_of(const Globals& g) {
  ECorOptions o;
  o.quad = quad_of(g);
  o.e_tol *= g.tol;
  return o;
}

std::vector<double> linspace(double a, double b, int points) {
  if (points < 1) throw ParameterError("--points must be >= 1");
  if (!(b >= a)) throw ParameterError("grid maximum must not be below its minimum");
  std::vector<double> v(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) v[k] = points == 1 ? a : a + (b - a) * k / (points - 1);
  return v;
}

std::string default_cache_dir() {
  if (const char* e = std::getenv("HSTAB_CACHE_DIR"); e && *e) return e;
  if (const char* e = std::getenv("XDG_CACHE_HOME"); e && *e) return std::string(e) + "/hstab";
  if (const char* e = std::getenv("HOME"); e && *e) return std::string(e) + "/.cache/hstab";
  return ".hstab-cache";
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParameterError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_atomic(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp" + std::to_string(fnv1a64(text) ^ static_cast<std::uint64_t>(
                                                     std::chrono::steady_clock::now().time_since_epoch().count()));
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write cache entry " + tmp.string());
    os << text;
  }
  fs::rename(tmp, path);
}

WeightedGraph make_graph(Model model, std::uint32_t n, double d, Interaction inter, std::uint64_t seed) {
  if (is_dense(model))
    return gen_dense(model == Model::dense_gaussian ? DenseKind::gaussian : DenseKind::bernoulli_half, n, seed);
  return gen(model, n, d, inter, seed);
}

struct GraphArgs {
  std::string model = "gnp";
  std::uint32_t n = 1000;
  double d = 10.0;
  std::string interaction = "antiferro";
  std::string graph_file;
  bool center = false;

  void add(CLI::App* app) {
    app->add_option("--model", model, "gnp|gnm|gnp_loops|gnm_loops|config_model|dense_gaussian|dense_bernoulli")
        ->capture_default_str();
    app->add_option("--n", n, "number of vertices")->capture_default_str();
    app->add_option("--d", d, "average degree (sparse models)")->capture_default_str();
    app->add_option("--interaction", interaction, "ferro|antiferro|spin_glass")->capture_default_str();
    app->add_option("--graph-file", graph_file, "read the graph from a TSV file instead of sampling");
    app->add_flag("--center", center, "subtract the ensemble mean weight");
  }

  json params(const Globals&) const {
    json p;
    if (!graph_file.empty()) {
      p["graph_file"] = graph_file;
      p["graph_hash"] = hex64(fnv1a64(read_file(graph_file)));
    } else {
      p["model"] = model;
      p["n"] = n;
      p["d"] = d;
      p["interaction"] = interaction;
    }
    p["center"] = center;
    return p;
  }

  WeightedGraph build(std::uint64_t seed) const {
    WeightedGraph g;
    if (!graph_file.empty()) {
      std::ifstream is(graph_file);
      if (!is) throw ParameterError("cannot open graph file '" + graph_file + "'");
      g = read_tsv(is);
    } else {
      g = make_graph(parse_model(model), n, d, parse_interaction(interaction), seed);
    }
    return center ? center_weights(g) : g;
  }
};

template <class T>
json stats(const std::vector<T>& xs) {
  double mean = 0.0;
  for (auto x : xs) mean += static_cast<double>(x);
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (auto x : xs) ss += (static_cast<double>(x) - mean) * (static_cast<double>(x) - mean);
  const double sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
  return {{"mean", mean}, {"sd", sd}};
}

// ---------------------------------------------------------------- commands

Payload do_threshold(const Globals&) {
  const double h = h_star();
  const auto s = w_sup(h);
  Payload p;
  p.result = {{"h_star", h},
              {"convention", std::string(convention_tag(s.convention))},
              {"residuals", {s.residuals[0], s.residuals[1]}},
              {"x_star", s.x_star},
              {"theta_star", s.theta_star},
              {"w_at_h_star", s.value}};
  Table t{{"h_star", "convention", "residual_x", "residual_theta"}, {}};
  t.rows.push_back({h, std::string(convention_tag(s.convention)), s.residuals[0], s.residuals[1]});
  p.table = t;
  return p;
}

Payload do_entropy_curve(const Globals& g, double h_min, double h_max, int points, double r) {
  const auto hs = linspace(h_min, h_max, points);
  std::vector<FirstMomentSaddle> out(hs.size());
  parallel_for(hs.size(), g.jobs, [&](std::size_t k) { out[k] = w_sup(hs[k], r); });
  Table t{{"h", "w", "x_star", "theta_star"}, {}};
  for (std::size_t k = 0; k < hs.size(); ++k) t.rows.push_back({hs[k], out[k].value, out[k].x_star, out[k].theta_star});
  Payload p;
  p.result["rows"] = t.to_json();
  p.result["upper_bound_only"] = r < 1.0;
  p.table = t;
  return p;
}

Payload do_energy_curve(const Globals& g, double h, double e_min, double e_max, int points) {
  const auto es = linspace(e_min, e_max, points);
  std::vector<double> w(es.size());
  parallel_for(es.size(), g.jobs, [&](std::size_t k) { w[k] = w_energy(es[k], h); });
  Table t{{"E", "w_prime"}, {}};
  for (std::size_t k = 0; k < es.size(); ++k) t.rows.push_back({es[k], w[k]});
  Payload p;
  p.result["rows"] = t.to_json();
  try {
    const auto roots = energy_roots(h);
    p.result["E_min"] = roots.e_min;
    p.result["E_max"] = roots.e_max;
  } catch (const DomainError&) {
    p.result["E_min"] = nullptr;
    p.result["E_max"] = nullptr;
  }
  p.table = t;
  return p;
}

Payload do_phase_diagram(const Globals& g, const std::vector<double>& hs, bool with_hcor) {
  struct Row {
    double e_min = std::numeric_limits<double>::quiet_NaN();
    double e_max = std::numeric_limits<double>::quiet_NaN();
    double e_cor = std::numeric_limits<double>::quiet_NaN();
  };
  const auto opt = ecor_of(g);
  std::vector<Row> rows(hs.size());
  parallel_for(hs.size(), g.jobs, [&](std::size_t k) {
    try {
      const auto r = energy_roots(hs[k]);
      rows[k].e_min = r.e_min;
      rows[k].e_max = r.e_max;
      rows[k].e_cor = e_cor(hs[k], opt);
    } catch (const DomainError&) {
      // h at or above h*: no energy band
    }
  });
  Table t{{"h", "E_min", "E_cor", "E_max"}, {}};
  for (std::size_t k = 0; k < hs.size(); ++k) t.rows.push_back({hs[k], rows[k].e_min, rows[k].e_cor, rows[k].e_max});
  Payload p;
  p.result["rows"] = t.to_json();
  if (with_hcor) p.result["h_cor"] = h_cor(opt, 1e-5 * g.tol);
  p.table = t;
  return p;
}

Payload do_second_moment(const Globals& g, double h, double x, int omega_points) {
  const auto quad = quad_of(g);
  const auto omegas = linspace(-1.0, 1.0, omega_points);
  std::vector<SecondMomentSaddle> out(omegas.size());
  parallel_for(omegas.size(), g.jobs,
               [&](std::size_t k) { out[k] = w_overlap(clamped({x, omegas[k], h}), quad); });
  Table t{{"omega", "W", "t_star", "theta1", "theta2", "residual"}, {}};
  for (const auto& s : out) {
    double res = 0.0;
    for (double r : s.residuals) res = std::max(res, std::abs(r));
    t.rows.push_back({s.omega, s.value, s.t_star, s.theta1_star, s.theta2_star, res});
  }
  Payload p;
  p.result["rows"] = t.to_json();
  p.result["h"] = h;
  p.result["x"] = x;
  p.table = t;
  return p;
}

struct SimArgs {
  GraphArgs graph;
  double h = 0.0;
  std::optional<double> energy_ge;
  std::optional<double> energy_le;
  std::string algo = "greedy";
  std::string move = "single_flip";
  int seeds = 1;
  int restarts = 1;
  AnnealSchedule schedule;
  std::string trajectory;
};

Payload do_simulate(const Globals& g, const SimArgs& a) {
  if (a.seeds < 1) throw ParameterError("--seeds must be >= 1");
  if (a.energy_ge && a.energy_le) throw ParameterError("--energy-ge and --energy-le are mutually exclusive");
  if (a.algo != "greedy" && a.algo != "anneal") throw ParameterError("--algo must be greedy or anneal");
  const MoveKind move = parse_move(a.move);
  std::optional<EnergyConstraint> ec;
  if (a.energy_ge) ec = EnergyConstraint{EnergyDirection::ge, *a.energy_ge};
  if (a.energy_le) ec = EnergyConstraint{EnergyDirection::le, *a.energy_le};
  if (ec && a.algo == "greedy") throw ParameterError("energy constraints need --algo anneal");
  AnnealSchedule sched = a.schedule;
  sched.move_kind = move;
  sched.validate();

  std::vector<SearchResult> res(static_cast<std::size_t>(a.seeds));
  std::vector<std::uint64_t> graph_seeds(res.size());
  parallel_for(res.size(), g.jobs, [&](std::size_t k) {
    graph_seeds[k] = mix64(g.seed + 2 * k);
    const auto graph = a.graph.build(graph_seeds[k]);
    const std::uint64_t search_seed = mix64(g.seed + 2 * k + 1);
    if (a.algo == "greedy")
      res[k] = greedy_restarts(graph, a.h, move, a.restarts, search_seed);
    else
      res[k] = anneal(graph, a.h, sched, search_seed, ec, !a.trajectory.empty() && k == 0);
  });

  Table t{{"seed", "graph_seed", "D", "D_per_n", "N", "N_per_n", "T", "H", "E", "cut", "x", "min_s", "magnetization"},
          {}};
  std::vector<double> dn, nn, es, min_s;
  bool all_stable = true;
  for (std::size_t k = 0; k < res.size(); ++k) {
    const auto& r = res[k].best_report;
    const double n = r.n;
    t.rows.push_back({static_cast<long long>(k), hex64(graph_seeds[k]), r.D, r.D / n, static_cast<long long>(r.N),
                      r.N / n, r.T, r.H, r.E, static_cast<long long>(r.cut), r.x_param, r.min_s,
                      res[k].best_sigma.magnetization()});
    dn.push_back(r.D / n);
    nn.push_back(r.N / n);
    es.push_back(r.E);
    min_s.push_back(r.min_s);
    all_stable = all_stable && r.min_s >= 0.0;
  }
  if (!a.trajectory.empty()) {
    std::ofstream os(a.trajectory);
    if (!os) throw ParameterError("cannot write trajectory file '" + a.trajectory + "'");
    write_trajectory_csv(res[0], os);
  }
  Payload p;
  p.result["summary"] = {{"D_per_n", stats(dn)},
                         {"N_per_n", stats(nn)},
                         {"E", stats(es)},
                         {"min_s_min", *std::min_element(min_s.begin(), min_s.end())},
                         {"all_zero_stable", all_stable}};
  p.result["per_seed"] = t.to_json();
  p.table = t;
  return p;
}

Payload do_enumerate(const Globals& g, const GraphArgs& ga, double h, bool pairs, bool bisections, bool verify,
                     int restarts) {
  const auto graph = ga.build(mix64(g.seed));
  const auto census = enumerate_census(graph, h, bisections, pairs, g.jobs);
  Payload p;
  p.result = to_json(census);
  if (verify) p.result["verify"] = to_json(verify_search(graph, h, restarts, mix64(g.seed + 1)));
  Table t{{"cut", "stable", "count"}, {}};
  for (const auto& [key, cnt] : census.histogram)
    t.rows.push_back({static_cast<long long>(key.first), static_cast<long long>(key.second),
                      static_cast<long long>(cnt)});
  p.table = t;
  return p;
}

Payload do_mc_density(const Globals& g, const GraphArgs& ga, const std::vector<double>& hs, int graphs) {
  const Model model = parse_model(ga.model);
  const Interaction inter = parse_interaction(ga.interaction);
  Table t{{"h", "density", "stderr", "mean_count"}, {}};
  for (double h : hs) {
    const auto m = mc_first_moment(model, ga.n, ga.d, h, inter, graphs, g.seed, g.jobs);
    t.rows.push_back({h, m.density, m.stderr_, m.mean_count});
  }
  Payload p;
  p.result["rows"] = t.to_json();
  p.table = t;
  return p;
}

Payload do_universality(const Globals& g, std::uint32_t n, const std::vector<double>& ds,
                        const std::vector<double>& hs, const std::vector<std::string>& models, int seeds,
                        const AnnealSchedule& sched) {
  std::vector<EnsembleSpec> specs;
  for (const auto& m : models) specs.push_back(parse_ensemble(m));
  const auto table = universality_sweep(specs, n, ds, hs, seeds, g.seed, sched, g.jobs);
  Table t{{"d", "h", "gap"}, {}};
  for (const auto& gap : table.gaps) t.rows.push_back({gap.d, gap.h, gap.gap});
  Table rows{{"model", "d", "h", "seeds", "mean_D", "sd_D", "mean_N", "sd_N", "scale"}, {}};
  for (const auto& r : table.rows)
    rows.rows.push_back({r.model, r.d, r.h, static_cast<long long>(r.seeds), r.mean_D, r.sd_D, r.mean_N, r.sd_N,
                         r.scale});
  json monotone = json::object();
  for (double h : hs) {
    double prev = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (const auto& gap : table.gaps)
      if (gap.h == h) {
        ok = ok && gap.gap <= prev;
        prev = gap.gap;
      }
    monotone[format_number(h)] = ok;
  }
  Payload p;
  p.result["gaps"] = t.to_json();
  p.result["rows"] = rows.to_json();
  p.result["monotone_non_increasing"] = monotone;
  p.table = t;
  return p;
}

Payload do_audit(const Globals&) {
  const auto rep = calibration_audit();
  Table t{{"convention", "w0", "h_star", "E_min0", "E_max0", "link_gap", "all_ok"}, {}};
  for (const auto& r : rep.rows)
    t.rows.push_back({r.tag, r.w0, r.h_star, r.e_min0, r.e_max0, r.link_gap, static_cast<long long>(r.all_ok())});
  Payload p;
  p.result["rows"] = t.to_json();
  p.result["selected"] = std::string(convention_tag(rep.selected));
  p.result["closed_and_variational_share_root"] = rep.closed_and_variational_share_root;
  p.result["closed_form_root"] = rep.closed_form_root;
  p.table = t;
  return p;
}

// ---------------------------------------------------------------- driver

json manifest_of(const std::string& command, const json& params, const Globals& g, Fmt fmt) {
  return {{"command", command},
          {"params", params},
          {"seed", g.seed},
          {"tol", g.tol},
          {"format", fmt == Fmt::csv ? "csv" : "json"},
          {"version", HSTAB_VERSION},
          {"convention", std::string(convention_tag(kCalibratedConvention))}};
}

std::string render(const json& manifest, const Payload& p, Fmt fmt) {
  std::ostringstream os;
  if (fmt == Fmt::csv) {
    if (!p.table) throw ParameterError("this command has no CSV form; use --format json");
    os << "# " << round_floats(manifest).dump() << '\n';
    p.table->write_csv(os);
  } else {
    json doc = {{"manifest", manifest}, {"result", p.result}};
    os << round_floats(doc).dump(2) << '\n';
  }
  return os.str();
}

Fmt resolve_format(const std::string& flag, Fmt fallback) {
  if (flag.empty()) return fallback;
  if (flag == "csv") return Fmt::csv;
  if (flag == "json") return Fmt::json;
  throw ParameterError("--format must be csv or json");
}

struct Runner {
  Globals& g;
  std::ostream& out;
  std::ostream& err;

  void emit(const std::string& text) {
    if (g.output == "-") {
      out << text;
      out.flush();
    } else {
      write_atomic(fs::absolute(g.output), text);
    }
  }

  void operator()(const std::string& command, const json& params, Fmt fallback, bool cacheable,
                  const std::function<Payload()>& compute) {
    const Fmt fmt = resolve_format(g.format, fallback);
    const json manifest = manifest_of(command, params, g, fmt);
    const auto t0 = std::chrono::steady_clock::now();
    const bool use_cache = cacheable && !g.no_cache;
    fs::path entry;
    if (use_cache) {
      const std::string dir = g.cache_dir.empty() ? default_cache_dir() : g.cache_dir;
      entry = fs::path(dir) / (hex64(fnv1a64(round_floats(manifest).dump())) + ".json");
      std::error_code ec;
      if (fs::exists(entry, ec)) {
        try {
          const auto cached = json::parse(read_file(entry.string()));
          if (cached.at("manifest") == round_floats(manifest)) {
            emit(cached.at("output").get<std::string>());
            if (!g.quiet) err << "cache hit " << entry.string() << '\n';
            return;
          }
        } catch (const json::exception&) {
          // unreadable entry: recompute and overwrite
        }
      }
    }
    const std::string text = render(manifest, compute(), fmt);
    if (use_cache) {
      json e = {{"manifest", round_floats(manifest)}, {"output", text}};
      write_atomic(entry, e.dump());
    }
    emit(text);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!g.quiet) err << "wall_time_s=" << format_number(secs) << '\n';
  }
};

std::vector<double> grid_or_range(const std::vector<double>& grid, double lo, double hi, int points) {
  return grid.empty() ? linspace(lo, hi, points) : grid;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"hstab: h-stable partitions, moment thresholds and simulations"};
  app.require_subcommand(1);
  // "--h" is a threshold option, so help is long-form only.
  app.set_help_flag("--help", "print help and exit");
  Globals g;
  app.add_option("--tol", g.tol, "tolerance scale applied to quadrature and root tolerances")->capture_default_str();
  app.add_option("--seed", g.seed, "master RNG seed")->capture_default_str();
  app.add_option("--jobs", g.jobs, "worker threads (never changes output)")->capture_default_str();
  app.add_option("--cache-dir", g.cache_dir, "result cache directory (default $HSTAB_CACHE_DIR or ~/.cache/hstab)");
  app.add_flag("--no-cache", g.no_cache, "neither read nor write the cache");
  app.add_option("--format", g.format, "csv|json (default depends on the command)");
  app.add_option("-o,--output", g.output, "output file ('-' for stdout)")->capture_default_str();
  app.add_flag("-q,--quiet", g.quiet, "suppress wall-time and cache diagnostics");
  app.fallthrough();

  auto* threshold = app.add_subcommand("threshold", "stability threshold h*");

  auto* entropy = app.add_subcommand("entropy-curve", "first-moment density w(h) on an h grid");
  double ec_hmin = 0.0, ec_hmax = 0.5, ec_r = 1.0;
  int ec_points = 51;
  entropy->add_option("--h-min", ec_hmin)->capture_default_str();
  entropy->add_option("--h-max", ec_hmax)->capture_default_str();
  entropy->add_option("--points", ec_points)->capture_default_str();
  entropy->add_option("--r", ec_r, "required fraction of stable vertices")->capture_default_str();

  auto* energy = app.add_subcommand("energy-curve", "energy-resolved density w'(E, h)");
  double en_h = 0.0, en_emin = -1.0, en_emax = 0.0;
  int en_points = 101;
  energy->add_option("--h", en_h)->capture_default_str();
  energy->add_option("--e-min", en_emin)->capture_default_str();
  energy->add_option("--e-max", en_emax)->capture_default_str();
  energy->add_option("--points", en_points)->capture_default_str();

  auto* phase = app.add_subcommand("phase-diagram", "E_min, E_cor and E_max on an h grid");
  std::vector<double> ph_grid;
  double ph_hmin = 0.0, ph_hmax = 0.34;
  int ph_points = 30;
  bool ph_hcor = false;
  phase->add_option("--h-grid", ph_grid, "explicit comma-separated h values")->delimiter(',');
  phase->add_option("--h-min", ph_hmin)->capture_default_str();
  phase->add_option("--h-max", ph_hmax)->capture_default_str();
  phase->add_option("--points", ph_points)->capture_default_str();
  phase->add_flag("--h-cor", ph_hcor, "also locate h_cor (JSON output)");

  auto* second = app.add_subcommand("second-moment", "overlap-resolved second-moment density W(omega)");
  std::optional<double> sm_h, sm_x;
  bool sm_auto = false;
  int sm_points = 41;
  second->add_option("--h", sm_h, "threshold (default h*)");
  auto* sm_x_opt = second->add_option("--x", sm_x, "cut parameter");
  second->add_flag("--auto-xstar", sm_auto, "use x*(h) from the first moment (default)")->excludes(sm_x_opt);
  second->add_option("--omega-points", sm_points)->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "greedy or annealed deficit minimization");
  SimArgs sim;
  sim.graph.add(simulate);
  simulate->add_option("--h", sim.h)->capture_default_str();
  auto* ge = simulate->add_option("--energy-ge", sim.energy_ge, "constrain H >= nE");
  simulate->add_option("--energy-le", sim.energy_le, "constrain H <= nE")->excludes(ge);
  simulate->add_option("--algo", sim.algo, "greedy|anneal")->capture_default_str();
  simulate->add_option("--move", sim.move, "single_flip|swap_pair")->capture_default_str();
  simulate->add_option("--seeds", sim.seeds)->capture_default_str();
  simulate->add_option("--restarts", sim.restarts, "greedy restarts per seed")->capture_default_str();
  simulate->add_option("--steps", sim.schedule.steps, "anneal sweeps")->capture_default_str();
  simulate->add_option("--rho-start", sim.schedule.rho_start)->capture_default_str();
  simulate->add_option("--rho-end", sim.schedule.rho_end)->capture_default_str();
  simulate->add_option("--epsilon1", sim.schedule.epsilon1)->capture_default_str();
  simulate->add_option("--trajectory", sim.trajectory, "write the first seed's anneal trajectory CSV here");

  auto* enumerate = app.add_subcommand("enumerate", "exhaustive census on a small instance");
  GraphArgs en_graph;
  en_graph.n = 12;
  en_graph.d = 3.0;
  double en_hh = 0.0;
  bool en_pairs = false, en_bis = false, en_verify = false;
  int en_restarts = 200;
  en_graph.add(enumerate);
  enumerate->add_option("--h", en_hh)->capture_default_str();
  enumerate->add_flag("--pairs", en_pairs, "pair-overlap census of stable bisections");
  enumerate->add_flag("--bisections", en_bis, "restrict to bisections");
  enumerate->add_flag("--verify", en_verify, "compare greedy and anneal with the exact minimum");
  enumerate->add_option("--restarts", en_restarts, "greedy restarts for --verify")->capture_default_str();

  auto* mc = app.add_subcommand("mc-density", "finite-size first-moment density from exact counts");
  GraphArgs mc_graph;
  mc_graph.n = 16;
  mc_graph.d = 3.0;
  std::vector<double> mc_h{0.0};
  int mc_graphs = 20;
  mc_graph.add(mc);
  mc->add_option("--h-grid", mc_h)->delimiter(',')->capture_default_str();
  mc->add_option("--graphs", mc_graphs)->capture_default_str();

  auto* uni = app.add_subcommand("universality", "cross-ensemble gap of annealed D/n");
  std::uint32_t un_n = 4096;
  std::vector<double> un_d{16, 64, 256}, un_h{0.2};
  std::vector<std::string> un_models{"ferro", "antiferro", "spin_glass", "dense_gaussian"};
  int un_seeds = 12;
  AnnealSchedule un_sched;
  un_sched.move_kind = MoveKind::swap_pair;
  un_sched.steps = 100;
  uni->add_option("--n", un_n)->capture_default_str();
  uni->add_option("--d-grid", un_d)->delimiter(',')->capture_default_str();
  uni->add_option("--h-grid", un_h)->delimiter(',')->capture_default_str();
  uni->add_option("--models", un_models)->delimiter(',')->capture_default_str();
  uni->add_option("--seeds", un_seeds)->capture_default_str();
  uni->add_option("--steps", un_sched.steps, "anneal sweeps")->capture_default_str();
  uni->add_option("--rho-end", un_sched.rho_end)->capture_default_str();

  auto* audit = app.add_subcommand("audit", "convention calibration audit");

  auto* gengraph = app.add_subcommand("gen-graph", "sample a graph and write it as TSV");
  GraphArgs gg;
  gg.add(gengraph);

  try {
    std::vector<std::string> args;
    for (int k = argc - 1; k >= 1; --k) args.emplace_back(argv[k]);
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? kExitOk : kExitParameter;
  }

  Runner run_cmd{g, out, err};
  try {
    if (g.jobs < 1) throw ParameterError("--jobs must be >= 1");
    if (!(g.tol > 0.0)) throw ParameterError("--tol must be positive");
    if (threshold->parsed()) {
      run_cmd("threshold", json::object(), Fmt::json, true, [&] { return do_threshold(g); });
    } else if (entropy->parsed()) {
      json p = {{"h_min", ec_hmin}, {"h_max", ec_hmax}, {"points", ec_points}, {"r", ec_r}};
      run_cmd("entropy-curve", p, Fmt::csv, true,
              [&] { return do_entropy_curve(g, ec_hmin, ec_hmax, ec_points, ec_r); });
    } else if (energy->parsed()) {
      json p = {{"h", en_h}, {"e_min", en_emin}, {"e_max", en_emax}, {"points", en_points}};
      run_cmd("energy-curve", p, Fmt::csv, true, [&] { return do_energy_curve(g, en_h, en_emin, en_emax, en_points); });
    } else if (phase->parsed()) {
      const auto hs = grid_or_range(ph_grid, ph_hmin, ph_hmax, ph_points);
      json p = {{"h_grid", hs}, {"h_cor", ph_hcor}};
      run_cmd("phase-diagram", p, Fmt::csv, true, [&] { return do_phase_diagram(g, hs, ph_hcor); });
    } else if (second->parsed()) {
      const double h = sm_h ? *sm_h : h_star();
      const double x = sm_x ? *sm_x : w_sup(h).x_star;
      json p = {{"h", h}, {"x", x}, {"auto_xstar", !sm_x.has_value()}, {"omega_points", sm_points}};
      run_cmd("second-moment", p, Fmt::csv, true, [&] { return do_second_moment(g, h, x, sm_points); });
    } else if (simulate->parsed()) {
      json p = sim.graph.params(g);
      p["h"] = sim.h;
      p["energy_ge"] = sim.energy_ge ? json(*sim.energy_ge) : json(nullptr);
      p["energy_le"] = sim.energy_le ? json(*sim.energy_le) : json(nullptr);
      p["algo"] = sim.algo;
      p["move"] = sim.move;
      p["seeds"] = sim.seeds;
      p["restarts"] = sim.restarts;
      p["schedule"] = {{"steps", sim.schedule.steps},
                       {"rho_start", sim.schedule.rho_start},
                       {"rho_end", sim.schedule.rho_end},
                       {"epsilon1", sim.schedule.epsilon1}};
      p["trajectory"] = sim.trajectory;
      // A trajectory file is a side effect the cache cannot replay.
      run_cmd("simulate", p, Fmt::json, sim.trajectory.empty(), [&] { return do_simulate(g, sim); });
    } else if (enumerate->parsed()) {
      json p = en_graph.params(g);
      p["h"] = en_hh;
      p["pairs"] = en_pairs;
      p["bisections"] = en_bis;
      p["verify"] = en_verify;
      p["restarts"] = en_restarts;
      run_cmd("enumerate", p, Fmt::json, true,
              [&] { return do_enumerate(g, en_graph, en_hh, en_pairs, en_bis, en_verify, en_restarts); });
    } else if (mc->parsed()) {
      json p = mc_graph.params(g);
      p["h_grid"] = mc_h;
      p["graphs"] = mc_graphs;
      run_cmd("mc-density", p, Fmt::csv, true, [&] { return do_mc_density(g, mc_graph, mc_h, mc_graphs); });
    } else if (uni->parsed()) {
      un_sched.validate();
      json p = {{"n", un_n},
                {"d_grid", un_d},
                {"h_grid", un_h},
                {"models", un_models},
                {"seeds", un_seeds},
                {"schedule",
                 {{"steps", un_sched.steps},
                  {"rho_start", un_sched.rho_start},
                  {"rho_end", un_sched.rho_end},
                  {"epsilon1", un_sched.epsilon1},
                  {"move", std::string(move_name(un_sched.move_kind))}}},
                {"centering", "mean-subtracted; +-1 weights rescaled to unit variance"}};
      run_cmd("universality", p, Fmt::csv, true,
              [&] { return do_universality(g, un_n, un_d, un_h, un_models, un_seeds, un_sched); });
    } else if (audit->parsed()) {
      run_cmd("audit", json::object(), Fmt::json, true, [&] { return do_audit(g); });
    } else if (gengraph->parsed()) {
      const json manifest = manifest_of("gen-graph", gg.params(g), g, Fmt::csv);
      std::ostringstream os;
      os << "# " << round_floats(manifest).dump() << '\n';
      write_tsv(gg.build(mix64(g.seed)), os);
      run_cmd.emit(os.str());
    }
  } catch (const ParameterError& e) {
    err << "parameter error: " << e.what() << '\n';
    return kExitParameter;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return kExitParameter;
  } catch (const OracleLimitError& e) {
    err << "oracle limit: " << e.what() << '\n';
    return kExitOracleLimit;
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"hstab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace hstab::cli
