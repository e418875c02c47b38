"""Equivalent access intensities for networks with finite offered load.

An unsaturated link spends time waiting for packets instead of competing
for the channel. That waiting time can be folded into a longer effective
backoff countdown, i.e. a reduced "equivalent" access intensity, after
which the saturated stationary analysis applies unchanged. The
compute-and-compare procedure iteratively classifies links as saturated
or unsaturated, solves for the equivalent intensities of the unsaturated
ones so that their throughput equals their offered load, and repeats
until the classification stabilizes.

Comparisons between offered load and computed throughput use a small
classification tolerance. Published load vectors are typically quoted to
four decimals, and solved throughputs match their targets only to the
solver tolerance, so exact floating comparisons would misclassify links
sitting on the saturation boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import (
    InfeasibleTargetError,
    IterationLimitExceededError,
    LengthMismatchError,
    NoConvergenceError,
)
from .graph import (
    DEFAULT_STATE_CAP,
    ContentionGraph,
    StateSpace,
    enumerate_independent_sets,
    remove_zero_load_links,
)
from .icn import as_intensity_vector, link_throughputs, state_weights

COMPARE_TOL = 1e-4
SOLVER_TOL = 1e-8
MAX_SWEEPS = 100_000
NEWTON_AFTER_STALLED_SWEEPS = 1_000
INTENSITY_CEILING = 1e6
# Per-sweep multiplicative factors are clipped to this band to damp the
# fixed-point updates.
DAMP_BAND = (0.1, 10.0)


def as_load_vector(loads, num_links: int) -> np.ndarray:
    """Validate offered loads: finite, 0 <= f_i < 1, one per link."""
    f = np.asarray(loads, dtype=float)
    if f.shape != (num_links,):
        raise LengthMismatchError(
            f"expected {num_links} offered loads, got shape {f.shape}"
        )
    if not np.all(np.isfinite(f)) or np.any(f < 0) or np.any(f >= 1):
        raise ValueError("offered loads must satisfy 0 <= f_i < 1")
    return f


@dataclass(frozen=True)
class LoadComparison:
    """Initial saturated/unsaturated split of links against TH0."""

    network_saturated: bool
    saturated: frozenset[int]
    unsaturated: frozenset[int]


@dataclass(frozen=True)
class SolveRecord:
    """One target-throughput solve: the partition used and its result."""

    saturated: frozenset[int]
    unsaturated: frozenset[int]
    rho_tilde: np.ndarray


@dataclass(frozen=True)
class IterationRecord:
    """One outer compute-and-compare iteration.

    ``solves`` holds every intensity solve performed in the iteration;
    more than one entry means overshoot reclassification forced a
    re-solve. ``rho_tilde`` and ``throughputs`` are the iteration's final
    intensity and throughput vectors, and the ``*_next`` sets are the
    repartition they induce.
    """

    index: int
    solves: tuple[SolveRecord, ...]
    rho_tilde: np.ndarray
    throughputs: np.ndarray
    saturated_next: frozenset[int]
    unsaturated_next: frozenset[int]


@dataclass(frozen=True)
class EaiSolution:
    """Final output of the compute-and-compare procedure.

    Zero-load links belong to neither set; their throughput and
    equivalent intensity are reported as 0.
    """

    throughputs: np.ndarray
    equivalent_intensities: np.ndarray
    intensities: np.ndarray
    offered_load: np.ndarray
    saturated_set: frozenset[int]
    unsaturated_set: frozenset[int]
    iterations: int
    trace: tuple[IterationRecord, ...]
    network_saturated: bool

    @property
    def extra_countdown(self) -> np.ndarray:
        """Mean extra backoff time per cycle implied by each rho_tilde.

        Nonnegative by construction; infinite for zero-load links, which
        never compete at all.
        """
        with np.errstate(divide="ignore"):
            return 1.0 / self.equivalent_intensities - 1.0 / self.intensities


def compare_load_vs_saturated(
    loads, th0, *, tol: float = COMPARE_TOL
) -> LoadComparison:
    """Split links by comparing offered load against saturated throughput.

    A link is saturated when f_i >= th0_i (within ``tol``); the network is
    saturated when that holds for every link.
    """
    f = np.asarray(loads, dtype=float)
    th = np.asarray(th0, dtype=float)
    if f.shape != th.shape:
        raise LengthMismatchError(
            f"loads shape {f.shape} != throughputs shape {th.shape}"
        )
    sat = frozenset(int(i) + 1 for i in np.nonzero(f >= th - tol)[0])
    unsat = frozenset(range(1, len(f) + 1)) - sat
    return LoadComparison(
        network_saturated=not unsat, saturated=sat, unsaturated=unsat
    )


def _target_throughputs(space, rho, target_idx):
    w = state_weights(space, rho)
    z = w.sum()
    th = np.empty(len(target_idx))
    for k, i in enumerate(target_idx):
        th[k] = w[space.membership_index[i]].sum() / z
    return th


def solve_target_throughputs(
    space: StateSpace,
    fixed: Mapping[int, float],
    targets: Mapping[int, float],
    *,
    initial: Mapping[int, float] | None = None,
    tol: float = SOLVER_TOL,
    max_sweeps: int = MAX_SWEEPS,
) -> np.ndarray:
    """Solve for intensities that hit target throughputs on some links.

    Links in ``fixed`` keep the given intensities; for every link in
    ``targets`` the solver finds the intensity at which that link's
    stationary throughput equals its target. The two maps must disjointly
    cover all links.

    The solver is a damped multiplicative fixed point: each sweep scales
    every target link's intensity by its target/actual throughput ratio.
    Throughput is increasing in the link's own intensity, so the map
    pushes each link toward its target; after a long stall it falls back
    to Newton steps with a finite-difference Jacobian.

    Args:
        space: enumerated state space of the graph under analysis.
        fixed: 1-based link -> pinned access intensity.
        targets: 1-based link -> target throughput, each in (0, 1).
        initial: optional 1-based link -> starting intensity for target
            links (defaults to f/(1-f), exact for an isolated link).
        tol: convergence threshold on max_i |th_i - f_i|.
        max_sweeps: combined sweep/Newton-step budget.

    Returns:
        Full intensity vector: solved values on target links, pinned
        values elsewhere.

    Raises:
        InfeasibleTargetError: a target is unreachable even at the
            intensity ceiling.
        NoConvergenceError: the iteration budget ran out.
    """
    n = space.graph.num_links
    fixed_links = set(fixed)
    target_links = set(targets)
    if fixed_links & target_links:
        raise ValueError("fixed and target links overlap")
    if fixed_links | target_links != set(range(1, n + 1)):
        raise ValueError("fixed and targets together must cover all links")
    if not target_links:
        return as_intensity_vector([fixed[i] for i in range(1, n + 1)], n)

    t_idx = np.array(sorted(i - 1 for i in target_links), dtype=np.int64)
    f = np.array([targets[i + 1] for i in t_idx], dtype=float)
    if np.any(f <= 0) or np.any(f >= 1):
        raise ValueError("target throughputs must lie strictly in (0, 1)")

    rho = np.empty(n, dtype=float)
    for i, val in fixed.items():
        rho[i - 1] = val
    if initial is None:
        rho[t_idx] = f / (1.0 - f)
    else:
        rho[t_idx] = [initial[i + 1] for i in t_idx]
    as_intensity_vector(rho, n)

    best_err = np.inf
    stalled = 0
    ceiling_stall = 0
    sweeps = 0
    newton_mode = False
    while sweeps < max_sweeps:
        th = _target_throughputs(space, rho, t_idx)
        err = float(np.max(np.abs(th - f)))
        if err <= tol:
            return rho
        if err < best_err - 1e-15:
            best_err = err
            stalled = 0
        else:
            stalled += 1

        at_ceiling_short = (rho[t_idx] >= INTENSITY_CEILING) & (th < f - tol)
        if np.any(at_ceiling_short):
            ceiling_stall += 1
            if ceiling_stall >= 100 or stalled >= NEWTON_AFTER_STALLED_SWEEPS:
                short = [int(t_idx[k]) + 1 for k in np.nonzero(at_ceiling_short)[0]]
                raise InfeasibleTargetError(
                    f"links {short} cannot reach their targets below "
                    f"intensity {INTENSITY_CEILING:g}"
                )
        else:
            ceiling_stall = 0

        if not newton_mode and stalled >= NEWTON_AFTER_STALLED_SWEEPS:
            newton_mode = True
        if newton_mode:
            rho, improved = _newton_step(space, rho, t_idx, f, th)
            if not improved:
                # Newton made no progress; fall back to one damped sweep.
                ratio = np.clip(f / th, *DAMP_BAND)
                rho[t_idx] = np.minimum(rho[t_idx] * ratio, INTENSITY_CEILING)
        else:
            ratio = np.clip(f / th, *DAMP_BAND)
            rho[t_idx] = np.minimum(rho[t_idx] * ratio, INTENSITY_CEILING)
        sweeps += 1
    raise NoConvergenceError(
        f"no convergence after {max_sweeps} sweeps (residual {best_err:.3e})"
    )


def _newton_step(space, rho, t_idx, f, th):
    """One damped Newton step on the target residuals; True if it improved."""
    m = len(t_idx)
    jac = np.empty((m, m))
    for col in range(m):
        h = 1e-6 * rho[t_idx[col]]
        bumped = rho.copy()
        bumped[t_idx[col]] += h
        jac[:, col] = (_target_throughputs(space, bumped, t_idx) - th) / h
    try:
        delta = np.linalg.solve(jac, f - th)
    except np.linalg.LinAlgError:
        return rho, False
    err0 = float(np.max(np.abs(th - f)))
    step = 1.0
    for _ in range(40):
        cand = rho.copy()
        cand[t_idx] = np.clip(rho[t_idx] + step * delta, 1e-12, INTENSITY_CEILING)
        cand_err = float(
            np.max(np.abs(_target_throughputs(space, cand, t_idx) - f))
        )
        if cand_err < err0:
            return cand, True
        step *= 0.5
    return rho, False


def reclassify_overshoot(
    rho_tilde,
    rho,
    saturated: frozenset[int],
    unsaturated: frozenset[int],
) -> tuple[frozenset[int], frozenset[int], bool]:
    """Move links whose solved intensity exceeds the true one to saturated.

    An unsaturated link's equivalent intensity can only be lower than its
    real one (waiting time adds countdown, never removes it), so a solved
    value above rho_i proves the link is actually saturated.
    """
    rho_tilde = np.asarray(rho_tilde, dtype=float)
    rho = np.asarray(rho, dtype=float)
    moved = frozenset(i for i in unsaturated if rho_tilde[i - 1] > rho[i - 1])
    return saturated | moved, unsaturated - moved, bool(moved)


def _backfill(values, index_map, num_links, fill=0.0):
    out = np.full(num_links, fill, dtype=float)
    for old, new in index_map.items():
        out[old - 1] = values[new - 1]
    return out


def _relabel(links: frozenset[int], inverse_map) -> frozenset[int]:
    return frozenset(inverse_map[i] for i in links)


def compute_and_compare(
    graph: ContentionGraph,
    rho,
    loads,
    *,
    compare_tol: float = COMPARE_TOL,
    solver_tol: float = SOLVER_TOL,
    max_iterations: int | None = None,
    max_states: int = DEFAULT_STATE_CAP,
) -> EaiSolution:
    """Compute per-link throughputs of a network with finite offered load.

    Zero-load links are removed up front and reported with zero
    throughput. The remaining network starts fully saturated: if the
    offered load dominates the saturated throughput everywhere, the
    saturated result is final. Otherwise the procedure alternates between
    solving for the equivalent intensities of the currently-unsaturated
    links (with overshoot reclassification and immediate re-solve) and
    repartitioning links against the recomputed throughputs, until the
    saturated set repeats. The returned trace records every solve and
    repartition.

    Args:
        graph: contention graph over all links.
        rho: access intensities (scalar for uniform, or per link).
        loads: offered load per link, each in [0, 1).
        compare_tol: classification tolerance for load/throughput
            comparisons.
        solver_tol: target-throughput solver tolerance.
        max_iterations: outer-loop safety guard (default 10 * num_links).
        max_states: independent-set enumeration cap.

    Raises:
        IterationLimitExceededError: the partition kept changing past the
            guard; the exception carries the trace for diagnosis.
    """
    n = graph.num_links
    f_full = as_load_vector(loads, n)
    rho_arr = np.asarray(rho, dtype=float)
    if rho_arr.ndim == 0:
        rho_arr = np.full(n, float(rho_arr))
    if rho_arr.shape != (n,):
        raise LengthMismatchError(
            f"expected {n} intensities, got shape {rho_arr.shape}"
        )

    reduced, index_map = remove_zero_load_links(graph, f_full)
    if not index_map:
        zeros = np.zeros(n)
        return EaiSolution(
            throughputs=zeros,
            equivalent_intensities=zeros.copy(),
            intensities=rho_arr,
            offered_load=f_full,
            saturated_set=frozenset(),
            unsaturated_set=frozenset(),
            iterations=0,
            trace=(),
            network_saturated=False,
        )
    inverse_map = {new: old for old, new in index_map.items()}
    kept_old = sorted(index_map)
    rho_r = as_intensity_vector(rho_arr[[i - 1 for i in kept_old]], reduced.num_links)
    f_r = f_full[[i - 1 for i in kept_old]]

    space = enumerate_independent_sets(reduced, max_states=max_states)
    th0 = link_throughputs(space, rho_r)
    split = compare_load_vs_saturated(f_r, th0, tol=compare_tol)
    if split.network_saturated:
        return EaiSolution(
            throughputs=_backfill(th0, index_map, n),
            equivalent_intensities=_backfill(rho_r, index_map, n),
            intensities=rho_arr,
            offered_load=f_full,
            saturated_set=_relabel(split.saturated, inverse_map),
            unsaturated_set=frozenset(),
            iterations=0,
            trace=(),
            network_saturated=True,
        )

    guard = max_iterations if max_iterations is not None else 10 * n
    sat, unsat = split.saturated, split.unsaturated
    prev_sat = frozenset(range(1, reduced.num_links + 1))
    trace: list[IterationRecord] = []
    th_cur = th0
    rho_cur = rho_r.copy()

    iteration = 0
    while sat != prev_sat:
        iteration += 1
        if iteration > guard:
            raise IterationLimitExceededError(
                f"saturated set still changing after {guard} iterations",
                trace=trace,
            )
        solves: list[SolveRecord] = []
        while True:
            rho_cur = solve_target_throughputs(
                space,
                fixed={i: rho_r[i - 1] for i in sat},
                targets={i: f_r[i - 1] for i in unsat},
                initial={i: rho_r[i - 1] for i in unsat},
                tol=solver_tol,
            )
            solves.append(
                SolveRecord(
                    saturated=_relabel(sat, inverse_map),
                    unsaturated=_relabel(unsat, inverse_map),
                    rho_tilde=_backfill(rho_cur, index_map, n),
                )
            )
            sat2, unsat2, changed = reclassify_overshoot(rho_cur, rho_r, sat, unsat)
            if not changed:
                break
            sat, unsat = sat2, unsat2
        th_cur = link_throughputs(space, rho_cur)
        next_sat = frozenset(
            int(i) + 1 for i in np.nonzero(f_r > th_cur + compare_tol)[0]
        )
        next_unsat = frozenset(range(1, reduced.num_links + 1)) - next_sat
        trace.append(
            IterationRecord(
                index=iteration,
                solves=tuple(solves),
                rho_tilde=_backfill(rho_cur, index_map, n),
                throughputs=_backfill(th_cur, index_map, n),
                saturated_next=_relabel(next_sat, inverse_map),
                unsaturated_next=_relabel(next_unsat, inverse_map),
            )
        )
        prev_sat = sat
        sat, unsat = next_sat, next_unsat

    return EaiSolution(
        throughputs=_backfill(th_cur, index_map, n),
        equivalent_intensities=_backfill(rho_cur, index_map, n),
        intensities=rho_arr,
        offered_load=f_full,
        saturated_set=_relabel(sat, inverse_map),
        unsaturated_set=_relabel(unsat, inverse_map),
        iterations=iteration,
        trace=tuple(trace),
        network_saturated=False,
    )
