"""Continuous-time event-driven simulator of the CSMA network model.

Each link keeps a backoff countdown that runs only while all of its
neighbors are idle, freezing (and later resuming with the remaining
time) whenever a neighbor transmits. When the countdown hits zero the
link transmits for a random duration with mean 1. In offered-load mode
packets arrive in a Poisson stream per link, a link competes only while
it has a packet, and buffers are unbounded; in saturated mode every link
always has a packet.

Countdown times are exponential with rate rho_i (mean transmission time
is the time unit). Transmission durations may be exponential, uniform on
[0, 2], or constant 1, which leaves the stationary behavior unchanged
and is exposed to let tests exercise that insensitivity.

Reproducibility: the 64-bit master seed is expanded through
numpy.random.SeedSequence into the 32-bit seed of the kernel's
generator, and replication r of a run derives its own master seed from
SeedSequence([seed, r]). Identical (graph, config) pairs therefore give
bit-identical results, and replications are mutually independent.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from . import _simcore
from .errors import InvalidConfigError, InvariantViolationError
from .graph import MAX_LINKS, ContentionGraph
from .icn import as_intensity_vector

MODE_SATURATED = "saturated"
MODE_OFFERED = "offered"

TX_DISTRIBUTIONS = {
    "exponential": _simcore.TX_EXPONENTIAL,
    "uniform": _simcore.TX_UNIFORM,
    "constant": _simcore.TX_CONSTANT,
}


@dataclass(frozen=True)
class SimConfig:
    """Simulation parameters; ``loads`` is required in offered mode.

    ``warmup`` defaults to 10% of the horizon when left as None.
    """

    mode: str
    rho: Sequence[float] | float
    loads: Sequence[float] | None = None
    transmission_distribution: str = "exponential"
    countdown_distribution: str = "exponential"
    horizon: float = 1e6
    warmup: float | None = None
    seed: int = 0

    @property
    def effective_warmup(self) -> float:
        return 0.1 * self.horizon if self.warmup is None else self.warmup


@dataclass(frozen=True)
class SimResult:
    """Post-warmup statistics of one simulation run."""

    airtime_fraction: np.ndarray
    transmissions: np.ndarray
    arrivals: np.ndarray
    queue_nonempty_fraction: np.ndarray
    elapsed: float


@dataclass(frozen=True)
class ReplicationSummary:
    """Aggregate of independent replications of one configuration."""

    mean_airtime: np.ndarray
    std_airtime: np.ndarray
    results: tuple[SimResult, ...]


def _validate(graph: ContentionGraph, config: SimConfig):
    n = graph.num_links
    if n < 1 or n > MAX_LINKS:
        raise InvalidConfigError(f"graph must have 1..{MAX_LINKS} links")
    if config.mode not in (MODE_SATURATED, MODE_OFFERED):
        raise InvalidConfigError(f"unknown mode {config.mode!r}")
    if config.countdown_distribution != "exponential":
        raise InvalidConfigError("countdown distribution must be exponential")
    if config.transmission_distribution not in TX_DISTRIBUTIONS:
        raise InvalidConfigError(
            f"unknown transmission distribution {config.transmission_distribution!r}"
        )
    if not (config.horizon > config.effective_warmup >= 0):
        raise InvalidConfigError("need horizon > warmup >= 0")
    if not isinstance(config.seed, (int, np.integer)) or not 0 <= int(config.seed) < 2**64:
        raise InvalidConfigError("seed must be a 64-bit unsigned integer")
    try:
        rho = as_intensity_vector(config.rho, n)
    except Exception as exc:
        raise InvalidConfigError(str(exc)) from exc
    if config.mode == MODE_OFFERED:
        if config.loads is None:
            raise InvalidConfigError("offered mode requires loads")
        f = np.asarray(config.loads, dtype=float)
        if f.shape != (n,):
            raise InvalidConfigError(f"expected {n} loads, got shape {f.shape}")
        if not np.all(np.isfinite(f)) or np.any(f < 0) or np.any(f >= 1):
            raise InvalidConfigError("loads must satisfy 0 <= f_i < 1")
    else:
        f = np.zeros(n)
    return rho, f


def _adjacency_csr(graph: ContentionGraph):
    n = graph.num_links
    indptr = np.zeros(n + 1, dtype=np.int32)
    indices = []
    for i in range(n):
        nbrs = sorted(graph.adjacency[i])
        indptr[i + 1] = indptr[i] + len(nbrs)
        indices.extend(j - 1 for j in nbrs)
    return indptr, np.asarray(indices, dtype=np.int32)


def _engine_seed(seed: int) -> int:
    return int(np.random.SeedSequence(int(seed)).generate_state(1, np.uint32)[0])


def run_icn_simulation(graph: ContentionGraph, config: SimConfig) -> SimResult:
    """Run one event-driven simulation and return post-warmup statistics.

    Deterministic for a fixed (graph, config): the same seed always
    produces bit-identical results.

    Raises:
        InvalidConfigError: inconsistent configuration.
        InvariantViolationError: the kernel observed two adjacent links
            transmitting at once, which valid dynamics cannot produce.
    """
    rho, f = _validate(graph, config)
    indptr, indices = _adjacency_csr(graph)
    offered = config.mode == MODE_OFFERED
    with np.errstate(divide="ignore"):
        arrival_scale = np.where(f > 0, 1.0 / np.where(f > 0, f, 1.0), 0.0)
    busy, tx_count, arrivals, work, violation = _simcore.run_events(
        graph.num_links,
        indptr,
        indices,
        1.0 / rho,
        offered,
        arrival_scale,
        TX_DISTRIBUTIONS[config.transmission_distribution],
        float(config.horizon),
        float(config.effective_warmup),
        _engine_seed(config.seed),
    )
    if violation:
        raise InvariantViolationError(
            "adjacent links transmitted simultaneously"
        )
    elapsed = float(config.horizon) - config.effective_warmup
    return SimResult(
        airtime_fraction=busy / elapsed,
        transmissions=tx_count,
        arrivals=arrivals,
        queue_nonempty_fraction=work / elapsed,
        elapsed=elapsed,
    )


def default_replication_seed(seed: int, rep: int) -> int:
    """Master seed of replication ``rep``, derived from (seed, rep)."""
    return int(
        np.random.SeedSequence([int(seed), int(rep)]).generate_state(1, np.uint64)[0]
    )


def replicate(
    graph: ContentionGraph,
    config: SimConfig,
    num_reps: int,
    *,
    seed_for_rep: Callable[[int, int], int] = default_replication_seed,
) -> ReplicationSummary:
    """Run independent replications and aggregate their airtime fractions.

    Replication r runs with seed ``seed_for_rep(config.seed, r)``; the
    default derivation gives mutually independent streams. The standard
    deviation is the per-link sample deviation across replications
    (zero when num_reps is 1).
    """
    if num_reps < 1:
        raise InvalidConfigError("num_reps must be >= 1")
    results = []
    for r in range(num_reps):
        rep_config = replace(config, seed=seed_for_rep(config.seed, r))
        results.append(run_icn_simulation(graph, rep_config))
    airtime = np.stack([res.airtime_fraction for res in results])
    std = (
        airtime.std(axis=0, ddof=1)
        if num_reps > 1
        else np.zeros(graph.num_links)
    )
    return ReplicationSummary(
        mean_airtime=airtime.mean(axis=0),
        std_airtime=std,
        results=tuple(results),
    )
