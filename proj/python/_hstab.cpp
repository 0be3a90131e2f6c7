#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "hstab/calibration.hpp"
#include "hstab/cli.hpp"
#include "hstab/errors.hpp"
#include "hstab/firstmoment.hpp"
#include "hstab/graphs.hpp"
#include "hstab/oracle.hpp"
#include "hstab/rng.hpp"
#include "hstab/search.hpp"
#include "hstab/secondmoment.hpp"
#include "hstab/specfun.hpp"
#include "hstab/stability.hpp"

namespace py = pybind11;
using namespace hstab;

namespace {

py::dict report_dict(const StabilityReport& r) {
  py::dict d;
  d["n"] = r.n;
  d["h"] = r.h;
  d["s"] = r.s;
  d["N"] = r.N;
  d["D"] = r.D;
  d["T"] = r.T;
  d["H"] = r.H;
  d["E"] = r.E;
  d["cut"] = r.cut;
  d["x"] = r.x_param;
  d["min_s"] = r.min_s;
  return d;
}

py::dict search_dict(const SearchResult& r) {
  py::dict d;
  d["spins"] = r.best_sigma.spins();
  d["best_deficit"] = r.best_deficit;
  d["report"] = report_dict(r.best_report);
  d["restarts"] = r.restarts;
  return d;
}

WeightedGraph sample_graph(const std::string& model, std::uint32_t n, double d, const std::string& interaction,
                           std::uint64_t seed) {
  const Model m = parse_model(model);
  if (is_dense(m))
    return gen_dense(m == Model::dense_gaussian ? DenseKind::gaussian : DenseKind::bernoulli_half, n, seed);
  return gen(m, n, d, parse_interaction(interaction), seed);
}

SpinConfig to_config(const WeightedGraph& g, const std::vector<int>& spins) {
  std::vector<std::int8_t> s(spins.begin(), spins.end());
  return SpinConfig(g, std::move(s));
}

}  // namespace

PYBIND11_MODULE(_hstab, m) {
  m.doc() = "Moment thresholds, stability functionals and searches for h-stable partitions";

  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<OracleLimitError>(m, "OracleLimitError", PyExc_ValueError);

  m.def("log1perf", &log1perf, py::arg("y"));
  m.def(
      "pfun", [](double t, double a1, double a2) { return pfun(t, a1, a2); }, py::arg("theta"), py::arg("a1"),
      py::arg("a2"));
  m.def(
      "qfun", [](double t, double a1, double a2) { return qfun(t, a1, a2); }, py::arg("theta"), py::arg("a1"),
      py::arg("a2"));
  m.def(
      "log_pfun", [](double t, double a1, double a2) { return log_pfun(t, a1, a2); }, py::arg("theta"),
      py::arg("a1"), py::arg("a2"));

  m.def(
      "w_x", [](double x, double h, double r) { return w_x(x, h, r); }, py::arg("x"), py::arg("h"),
      py::arg("r") = 1.0);
  m.def(
      "w_sup",
      [](double h, double r) {
        const auto s = w_sup(h, r);
        py::dict d;
        d["x_star"] = s.x_star;
        d["theta_star"] = s.theta_star;
        d["value"] = s.value;
        d["residuals"] = std::vector<double>{s.residuals[0], s.residuals[1]};
        d["convention"] = std::string(convention_tag(s.convention));
        d["upper_bound_only"] = s.upper_bound_only;
        return d;
      },
      py::arg("h"), py::arg("r") = 1.0);
  m.def("h_star", [] { return h_star(); });
  m.def(
      "w_energy", [](double E, double h) { return w_energy(E, h); }, py::arg("E"), py::arg("h"));
  m.def(
      "energy_roots",
      [](double h) {
        const auto r = energy_roots(h);
        return py::make_tuple(r.e_min, r.e_max);
      },
      py::arg("h"));

  m.def(
      "w_overlap",
      [](double x, double omega, double h) {
        const auto s = w_overlap(clamped({x, omega, h}));
        py::dict d;
        d["W"] = s.value;
        d["t_star"] = s.t_star;
        d["theta1"] = s.theta1_star;
        d["theta2"] = s.theta2_star;
        d["omega"] = s.omega;
        d["residuals"] = std::vector<double>(s.residuals.begin(), s.residuals.end());
        d["method"] = std::string(method_tag(s.method));
        return d;
      },
      py::arg("x"), py::arg("omega"), py::arg("h"));
  m.def(
      "e_cor", [](double h) { return e_cor(h); }, py::arg("h"));
  m.def("h_cor", [] { return h_cor(); });

  m.def("calibration_audit", [] {
    const auto rep = calibration_audit();
    py::list rows;
    for (const auto& r : rep.rows) {
      py::dict d;
      d["convention"] = r.tag;
      d["w0"] = r.w0;
      d["h_star"] = r.h_star;
      d["e_min0"] = r.e_min0;
      d["e_max0"] = r.e_max0;
      d["link_gap"] = r.link_gap;
      d["ok"] = r.all_ok();
      rows.append(d);
    }
    py::dict out;
    out["rows"] = rows;
    out["selected"] = std::string(convention_tag(rep.selected));
    out["closed_and_variational_share_root"] = rep.closed_and_variational_share_root;
    return out;
  });

  py::class_<WeightedGraph>(m, "WeightedGraph")
      .def_property_readonly("n", &WeightedGraph::n)
      .def_property_readonly("norm_param", &WeightedGraph::norm_param)
      .def_property_readonly("is_dense", &WeightedGraph::is_dense)
      .def_property_readonly("offset", &WeightedGraph::offset)
      .def_property_readonly("edge_slots", &WeightedGraph::edge_slots)
      .def("weight", &WeightedGraph::weight, py::arg("i"), py::arg("j"))
      .def("to_tsv", [](const WeightedGraph& g) {
        std::ostringstream os;
        write_tsv(g, os);
        return os.str();
      });
  m.def("sample_graph", &sample_graph, py::arg("model"), py::arg("n"), py::arg("d") = 0.0,
        py::arg("interaction") = "antiferro", py::arg("seed") = 0);
  m.def(
      "graph_from_edges",
      [](std::uint32_t n, double norm, const std::vector<std::tuple<std::uint32_t, std::uint32_t, double>>& edges) {
        std::vector<Edge> es;
        for (const auto& [i, j, w] : edges) es.push_back({i, j, w});
        return WeightedGraph::sparse(n, norm, Model::gnm, Interaction::custom, std::move(es));
      },
      py::arg("n"), py::arg("norm"), py::arg("edges"));
  m.def(
      "read_tsv",
      [](const std::string& text) {
        std::istringstream is(text);
        return read_tsv(is);
      },
      py::arg("text"));
  m.def(
      "center_weights", [](const WeightedGraph& g) { return center_weights(g); }, py::arg("g"));

  m.def(
      "stability_report",
      [](const WeightedGraph& g, const std::vector<int>& spins, double h) {
        return report_dict(stability_report(to_config(g, spins), g, h));
      },
      py::arg("g"), py::arg("spins"), py::arg("h"));

  m.def(
      "greedy",
      [](const WeightedGraph& g, double h, const std::string& move, int restarts, std::uint64_t seed) {
        const MoveKind mk = parse_move(move);
        SearchResult r;
        {
          py::gil_scoped_release release;
          r = greedy_restarts(g, h, mk, restarts, seed);
        }
        return search_dict(r);
      },
      py::arg("g"), py::arg("h"), py::arg("move") = "single_flip", py::arg("restarts") = 1, py::arg("seed") = 0);
  m.def(
      "anneal",
      [](const WeightedGraph& g, double h, int steps, double rho_start, double rho_end, double epsilon1,
         const std::string& move, std::uint64_t seed) {
        AnnealSchedule s;
        s.steps = steps;
        s.rho_start = rho_start;
        s.rho_end = rho_end;
        s.epsilon1 = epsilon1;
        s.move_kind = parse_move(move);
        SearchResult r;
        {
          py::gil_scoped_release release;
          r = anneal(g, h, s, seed);
        }
        return search_dict(r);
      },
      py::arg("g"), py::arg("h"), py::arg("steps") = 200, py::arg("rho_start") = 1.0, py::arg("rho_end") = 200.0,
      py::arg("epsilon1") = 0.05, py::arg("move") = "single_flip", py::arg("seed") = 0);

  m.def(
      "enumerate_census",
      [](const WeightedGraph& g, double h, bool bisections, bool pairs) {
        return cli::round_floats(to_json(enumerate_census(g, h, bisections, pairs))).dump();
      },
      py::arg("g"), py::arg("h"), py::arg("bisections") = false, py::arg("pairs") = false,
      "Census as a JSON string.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the command-line interface in-process; returns (exit_code, stdout, stderr).");
}
