"""Moment thresholds, stability functionals and searches for h-stable partitions."""

import json as _json

from ._hstab import (  # noqa: F401
    DomainError,
    OracleLimitError,
    ParameterError,
    SolverError,
    WeightedGraph,
    anneal,
    calibration_audit,
    center_weights,
    e_cor,
    energy_roots,
    graph_from_edges,
    greedy,
    h_cor,
    h_star,
    log1perf,
    log_pfun,
    pfun,
    qfun,
    read_tsv,
    run_cli,
    sample_graph,
    stability_report,
    w_energy,
    w_overlap,
    w_sup,
    w_x,
)
from ._hstab import enumerate_census as _enumerate_census

__version__ = "0.3.0"


def enumerate_census(g, h, bisections=False, pairs=False):
    """Exact census of a small graph as a dict (integer-keyed maps use string keys)."""
    return _json.loads(_enumerate_census(g, h, bisections, pairs))
