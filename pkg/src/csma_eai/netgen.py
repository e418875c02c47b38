"""Random topologies, the benchmark load recipe, and error reporting.

The random graph model is uniform G(n, m): exactly m edges drawn without
replacement from all unordered pairs, with m = round(n * mean_degree / 2).
The benchmark load recipe starts from the saturated throughputs and
keeps odd links at their saturated level while backing even links off by
0.1, producing a mix of boundary-saturated and clearly unsaturated links.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import LengthMismatchError, TooManyEdgesError
from .graph import DEFAULT_STATE_CAP, ContentionGraph, build_graph
from .icn import saturated_throughputs

RELATIVE_ERROR_FLOOR = 1e-9


def random_contention_graph(
    n: int, mean_degree: float, seed: int
) -> ContentionGraph:
    """Uniform random simple graph with round(n * mean_degree / 2) edges.

    Deterministic per seed. Connectivity is not enforced.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if mean_degree < 0:
        raise ValueError("mean_degree must be >= 0")
    m = int(round(n * mean_degree / 2))
    max_edges = n * (n - 1) // 2
    if m > max_edges:
        raise TooManyEdgesError(
            f"{m} edges requested but a simple graph on {n} links has at most {max_edges}"
        )
    pairs = list(combinations(range(1, n + 1), 2))
    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(pairs), size=m, replace=False) if m else []
    return build_graph(n, [pairs[int(k)] for k in sorted(chosen)])


def unsaturated_load_recipe(
    graph: ContentionGraph, rho0, *, max_states: int = DEFAULT_STATE_CAP
) -> np.ndarray:
    """Offered loads derived from the saturated throughputs.

    Odd links (1-based labels) demand exactly their saturated throughput;
    even links demand 0.1 less, floored at zero.
    """
    th0 = saturated_throughputs(graph, rho0, max_states=max_states)
    f = th0.copy()
    for i in range(1, graph.num_links + 1):
        if i % 2 == 0:
            f[i - 1] = max(th0[i - 1] - 0.1, 0.0)
    return f


@dataclass(frozen=True)
class ErrorReport:
    """Per-link relative errors of simulated vs computed throughputs.

    Links whose computed throughput is below the floor are excluded from
    the relative mean (their entry is NaN) and reported with absolute
    errors instead.
    """

    relative_errors: np.ndarray
    mean_relative_error: float
    excluded_links: tuple[int, ...]
    excluded_absolute_errors: tuple[float, ...]


def throughput_error_report(eai, sim) -> ErrorReport:
    """Relative error of simulated airtime against computed throughput."""
    eai = np.asarray(eai, dtype=float)
    sim = np.asarray(sim, dtype=float)
    if eai.shape != sim.shape or eai.ndim != 1:
        raise LengthMismatchError(
            f"shape mismatch: {eai.shape} vs {sim.shape}"
        )
    if np.any(eai < 0):
        raise ValueError("computed throughputs must be >= 0")
    included = eai >= RELATIVE_ERROR_FLOOR
    rel = np.full(len(eai), np.nan)
    rel[included] = np.abs(sim[included] - eai[included]) / eai[included]
    mean = float(rel[included].mean()) if included.any() else float("nan")
    excluded = np.nonzero(~included)[0]
    return ErrorReport(
        relative_errors=rel,
        mean_relative_error=mean,
        excluded_links=tuple(int(i) + 1 for i in excluded),
        excluded_absolute_errors=tuple(
            float(abs(sim[i] - eai[i])) for i in excluded
        ),
    )
