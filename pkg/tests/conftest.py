"""Shared fixtures and independent oracles for the test suite.

The brute-force helpers here deliberately avoid the package's own
enumeration and analysis code paths so they can serve as independent
cross-checks.
"""

from itertools import combinations

import numpy as np
import pytest

from csma_eai import build_graph

RHO0 = 5.3548


@pytest.fixture
def fig1a():
    """Four links where {1,2} and {3,4} mutually sense each other."""
    return build_graph(4, [(1, 3), (1, 4), (2, 3), (2, 4)])


@pytest.fixture
def single_link():
    return build_graph(1, [])


@pytest.fixture
def path3():
    return build_graph(3, [(1, 2), (2, 3)])


def brute_force_independent_masks(num_links, edges):
    """All independent sets by filtering every subset (oracle)."""
    edge_bits = [(1 << (u - 1)) | (1 << (v - 1)) for u, v in edges]
    out = []
    for mask in range(1 << num_links):
        if all(mask & eb != eb for eb in edge_bits):
            out.append(mask)
    return out


def brute_force_throughputs(num_links, edges, rho):
    """Stationary throughputs from the subset-filter enumeration (oracle)."""
    rho = np.asarray(rho, dtype=float)
    masks = brute_force_independent_masks(num_links, edges)
    weights = []
    for mask in masks:
        w = 1.0
        for i in range(num_links):
            if mask >> i & 1:
                w *= rho[i]
        weights.append(w)
    z = sum(weights)
    th = np.zeros(num_links)
    for mask, w in zip(masks, weights):
        for i in range(num_links):
            if mask >> i & 1:
                th[i] += w / z
    return th


def random_graph_edges(rng, num_links, edge_prob=0.4):
    """Random simple graph as an edge list (Bernoulli per pair)."""
    return [
        (u, v)
        for u, v in combinations(range(1, num_links + 1), 2)
        if rng.random() < edge_prob
    ]
