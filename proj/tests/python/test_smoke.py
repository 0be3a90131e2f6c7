import json
import math

import pytest

import hstab


def test_threshold_and_anchor():
    assert abs(hstab.h_star() - 0.3513) < 5e-4
    s = hstab.w_sup(0.0)
    assert abs(s["value"] - 0.1992) < 5e-4
    assert max(abs(r) for r in s["residuals"]) < 1e-8


def test_energy_roots():
    lo, hi = hstab.energy_roots(0.0)
    assert lo < hi
    assert abs(lo + 0.7915) < 1e-3
    with pytest.raises(hstab.DomainError):
        hstab.energy_roots(0.5)


def test_special_functions():
    assert hstab.log1perf(0.0) == 0.0
    assert abs(hstab.pfun(0.0, 1.0, 0.0) - 0.25) < 1e-12
    assert abs(math.log(hstab.pfun(0.3, 0.8, -0.5)) - hstab.log_pfun(0.3, 0.8, -0.5)) < 1e-10
    with pytest.raises(hstab.ParameterError):
        hstab.pfun(0.0, -1.0, 0.0)


def test_triangle():
    g = hstab.graph_from_edges(3, 3.0, [(0, 1, -1.0), (0, 2, -1.0), (1, 2, -1.0)])
    census = hstab.enumerate_census(g, 0.0)
    assert census["configurations"] == 8
    assert census["X_by_count"]["3"] == 6
    rep = hstab.stability_report(g, [1, 1, -1], 0.0)
    assert rep["N"] == 3
    assert rep["D"] == 0.0


def test_searches():
    g = hstab.sample_graph("gnp", 200, 6.0, "spin_glass", seed=3)
    r = hstab.greedy(g, 0.0, restarts=2, seed=1)
    assert r["report"]["min_s"] >= 0.0
    a = hstab.anneal(g, 0.2, steps=10, move="swap_pair", seed=2)
    assert sum(a["spins"]) == 0
    assert a["best_deficit"] == pytest.approx(a["report"]["D"])


def test_graph_roundtrip():
    g = hstab.sample_graph("gnm", 20, 3.0, "ferro", seed=5)
    back = hstab.read_tsv(g.to_tsv())
    assert back.n == 20
    assert all(back.weight(i, j) == g.weight(i, j) for i in range(20) for j in range(20))


def test_cli_in_process():
    code, out, err = hstab.run_cli(["--no-cache", "-q", "threshold"])
    assert code == 0
    assert err == ""
    assert abs(json.loads(out)["result"]["h_star"] - 0.3513) < 5e-4
    code, _, _ = hstab.run_cli(["--no-cache", "enumerate", "--n", "40"])
    assert code == 4
