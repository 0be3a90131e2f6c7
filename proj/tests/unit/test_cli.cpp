#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "hstab/cli.hpp"

using namespace hstab::cli;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("hstab_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

std::string second_line(const std::string& s) {
  const auto a = s.find('\n') + 1;
  return s.substr(a, s.find('\n', a) - a);
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("number formatting") {
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(1.0 / 3) == "0.333333333333");
    CHECK(format_number(NAN) == "nan");
    CHECK(format_number(INFINITY) == "inf");
    CHECK(format_number(-INFINITY) == "-inf");
    const auto j = round_floats(nlohmann::json{{"a", 0.1 + 0.2}, {"b", {1.0 / 3}}, {"c", 7}});
    CHECK(j["a"].get<double>() == 0.3);
    CHECK(j["b"][0].get<double>() == 0.333333333333);
    CHECK(j["c"].get<int>() == 7);
  }

  TEST_CASE("FNV-1a reference values") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
  }

  TEST_CASE("table rendering") {
    Table t{{"x", "n", "tag"}, {{0.25, 3LL, std::string("a")}, {NAN, -1LL, std::string("b")}}};
    std::ostringstream os;
    t.write_csv(os);
    CHECK(os.str() == "x,n,tag\n0.25,3,a\nnan,-1,b\n");
    const auto j = t.to_json();
    CHECK(j[0]["n"] == 3);
    CHECK(j[1]["x"].dump() == "null");
  }

  TEST_CASE("exit codes") {
    CHECK(run_cli({"--no-cache", "entropy-curve", "--points", "0"}).code == kExitParameter);
    CHECK(run_cli({"--no-cache", "no-such-command"}).code == kExitParameter);
    CHECK(run_cli({"--no-cache", "simulate", "--model", "nope"}).code == kExitParameter);
    CHECK(run_cli({"--no-cache", "enumerate", "--n", "30"}).code == kExitOracleLimit);
    const auto ok = run_cli({"--no-cache", "-q", "entropy-curve", "--points", "3"});
    CHECK(ok.code == kExitOk);
    CHECK(ok.err.empty());
  }

  TEST_CASE("CSV outputs carry a manifest line and the documented header") {
    const auto r = run_cli({"--no-cache", "-q", "--format", "csv", "entropy-curve", "--points", "3", "--h-max", "0.2"});
    REQUIRE(r.code == 0);
    REQUIRE(r.out.rfind("# {", 0) == 0);
    const auto manifest = nlohmann::json::parse(first_line(r.out).substr(2));
    CHECK(manifest["command"] == "entropy-curve");
    CHECK(manifest.contains("version"));
    CHECK(manifest.contains("convention"));
    CHECK_FALSE(manifest.contains("jobs"));
    CHECK(second_line(r.out) == "h,w,x_star,theta_star");
    const auto e = run_cli({"--no-cache", "-q", "energy-curve", "--points", "5"});
    CHECK(second_line(e.out) == "E,w_prime");
    const auto s = run_cli({"--no-cache", "-q", "--format", "csv", "simulate", "--n", "60", "--d", "4", "--seeds", "2",
                            "--algo", "greedy", "--restarts", "2"});
    CHECK(second_line(s.out).rfind("seed,graph_seed,D,D_per_n,N,", 0) == 0);
  }

  TEST_CASE("JSON output") {
    const auto r = run_cli({"--no-cache", "-q", "threshold"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(std::abs(j["result"]["h_star"].get<double>() - 0.3513) < 5e-4);
    CHECK(j["manifest"]["command"] == "threshold");
  }

  TEST_CASE("cache hits are byte-identical") {
    const auto dir = fresh_dir("cache");
    const std::vector<std::string> args{"--cache-dir", dir.string(), "simulate", "--n", "80", "--d", "5",
                                        "--seeds", "3", "--algo", "anneal", "--steps", "10"};
    const auto a = run_cli(args);
    REQUIRE(a.code == 0);
    CHECK(a.err.find("cache hit") == std::string::npos);
    const auto b = run_cli(args);
    CHECK(b.out == a.out);
    CHECK(b.err.find("cache hit") != std::string::npos);
    std::size_t entries = 0;
    for (const auto& e : fs::directory_iterator(dir)) entries += e.path().extension() == ".json";
    CHECK(entries == 1u);
    fs::remove_all(dir);
  }

  TEST_CASE("--jobs never changes the bytes") {
    for (const auto& cmd : std::vector<std::vector<std::string>>{
             {"simulate", "--n", "120", "--d", "6", "--seeds", "4", "--algo", "anneal", "--steps", "8"},
             {"enumerate", "--n", "14", "--d", "4", "--pairs", "--bisections"},
             {"phase-diagram", "--h-grid", "0,0.2"}}) {
      std::vector<std::string> one{"--no-cache", "-q", "--jobs", "1"}, four{"--no-cache", "-q", "--jobs", "4"};
      one.insert(one.end(), cmd.begin(), cmd.end());
      four.insert(four.end(), cmd.begin(), cmd.end());
      const auto a = run_cli(one), b = run_cli(four);
      REQUIRE(a.code == 0);
      CHECK(a.out == b.out);
    }
  }

  TEST_CASE("output file and graph export") {
    const auto dir = fresh_dir("files");
    const auto graph = (dir / "g.tsv").string();
    REQUIRE(run_cli({"-q", "-o", graph, "gen-graph", "--model", "gnm", "--n", "12", "--d", "3"}).code == 0);
    const auto r = run_cli({"--no-cache", "-q", "enumerate", "--graph-file", graph, "--h", "0"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["result"]["n"] == 12);
    CHECK(run_cli({"--no-cache", "-q", "enumerate", "--graph-file", (dir / "missing.tsv").string()}).code ==
          kExitParameter);
    fs::remove_all(dir);
  }
}
