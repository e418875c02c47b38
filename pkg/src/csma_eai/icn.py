"""Exact stationary analysis of the idealized CSMA network model.

With exponential countdown and unit-mean transmission time, the network
state process is a reversible continuous-time Markov chain over the
independent sets of the contention graph. Each state's stationary weight
is the product of the access intensities of its transmitting links; the
normalizing sum over all states is the partition function. Per-link
throughput is the stationary probability mass of the states in which the
link transmits.

Time is normalized so that the mean transmission duration is 1, making
throughput equal to airtime fraction and the countdown rate of link i
equal to its access intensity rho_i.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ComputationOverflowError, LengthMismatchError
from .graph import (
    DEFAULT_STATE_CAP,
    ContentionGraph,
    StateSpace,
    _check_state_index,
    enumerate_independent_sets,
)


def as_intensity_vector(rho, num_links: int) -> np.ndarray:
    """Validate access intensities: positive, finite, one per link.

    A scalar is broadcast to all links (uniform intensity).
    """
    arr = np.asarray(rho, dtype=float)
    if arr.ndim == 0:
        arr = np.full(num_links, float(arr))
    if arr.shape != (num_links,):
        raise LengthMismatchError(
            f"expected {num_links} intensities, got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise ValueError("access intensities must be finite and > 0")
    return arr


@dataclass(frozen=True)
class StationaryDistribution:
    """Stationary state probabilities and the partition function value."""

    probabilities: np.ndarray
    partition_value: float


def state_weights(space: StateSpace, rho) -> np.ndarray:
    """Vector of stationary weights, one per state in state order.

    The weight of a state is the product of rho_i over its transmitting
    links (1 for the all-idle state).
    """
    rho = as_intensity_vector(rho, space.graph.num_links)
    w = np.ones(space.num_states, dtype=float)
    with np.errstate(over="ignore"):
        for i, idx in enumerate(space.membership_index):
            w[idx] *= rho[i]
    if not np.all(np.isfinite(w)):
        raise ComputationOverflowError("state weight exceeded double range")
    return w


def state_weight(space: StateSpace, rho, state_index: int) -> float:
    """Stationary weight of one state: the product of its members' rho_i."""
    rho = as_intensity_vector(rho, space.graph.num_links)
    _check_state_index(state_index, space.num_states)
    mask = int(space.masks[state_index])
    w = 1.0
    for i in range(space.graph.num_links):
        if mask >> i & 1:
            w *= rho[i]
    if not np.isfinite(w):
        raise ComputationOverflowError("state weight exceeded double range")
    return w


def partition_function(space: StateSpace, rho) -> float:
    """Normalizing constant Z: the sum of all state weights."""
    z = float(state_weights(space, rho).sum())
    if not np.isfinite(z):
        raise ComputationOverflowError("partition function exceeded double range")
    return z


def stationary_distribution(space: StateSpace, rho) -> StationaryDistribution:
    """Stationary probability of each state, in state order."""
    w = state_weights(space, rho)
    z = float(w.sum())
    if not np.isfinite(z):
        raise ComputationOverflowError("partition function exceeded double range")
    return StationaryDistribution(probabilities=w / z, partition_value=z)


def link_throughputs(space: StateSpace, rho) -> np.ndarray:
    """Per-link normalized throughput under saturated competition.

    th_i is the stationary probability that link i transmits, accumulated
    over that link's membership index in state order.
    """
    w = state_weights(space, rho)
    z = float(w.sum())
    if not np.isfinite(z):
        raise ComputationOverflowError("partition function exceeded double range")
    th = np.empty(space.graph.num_links, dtype=float)
    for i, idx in enumerate(space.membership_index):
        th[i] = w[idx].sum() / z
    return th


def saturated_throughputs(
    graph: ContentionGraph, rho, *, max_states: int = DEFAULT_STATE_CAP
) -> np.ndarray:
    """Enumerate the graph's states and compute saturated throughputs."""
    space = enumerate_independent_sets(graph, max_states=max_states)
    return link_throughputs(space, rho)
