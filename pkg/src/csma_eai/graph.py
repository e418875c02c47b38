"""Contention graphs and their independent-set state spaces.

Links of a CSMA network are vertices; an edge joins two links whose
transmitters carrier-sense each other. The feasible simultaneous
transmission patterns are exactly the independent sets of this graph,
enumerated here as bit sets over at most 64 links.

Link labels are 1-based everywhere in the public API, matching the
usual convention for numbering wireless links; bit k of a state mask
corresponds to link k+1.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    IndexOutOfRangeError,
    SelfLoopError,
    StateSpaceTooLargeError,
    TooManyLinksError,
)

MAX_LINKS = 64
DEFAULT_STATE_CAP = 4_194_304


@dataclass(frozen=True)
class ContentionGraph:
    """Immutable pairwise carrier-sensing graph over num_links links."""

    num_links: int
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[frozenset[int], ...]

    def neighbors(self, link: int) -> frozenset[int]:
        """Neighbor labels of a 1-based link."""
        _check_link(link, self.num_links)
        return self.adjacency[link - 1]

    def degree(self, link: int) -> int:
        return len(self.neighbors(link))

    @property
    def adjacency_masks(self) -> tuple[int, ...]:
        """Per-link neighbor bit masks (bit k = link k+1)."""
        return tuple(
            sum(1 << (j - 1) for j in nbrs) for nbrs in self.adjacency
        )


@dataclass(frozen=True)
class LinkState:
    """One feasible transmission pattern, stored as a bit set."""

    mask: int
    num_links: int

    @property
    def members(self) -> tuple[int, ...]:
        """Transmitting links, as sorted 1-based labels."""
        return tuple(
            i + 1 for i in range(self.num_links) if self.mask >> i & 1
        )

    def __contains__(self, link: int) -> bool:
        return 1 <= link <= self.num_links and bool(self.mask >> (link - 1) & 1)

    def __len__(self) -> int:
        return int(self.mask).bit_count()


@dataclass(frozen=True)
class StateSpace:
    """All independent sets of a graph, in ascending bit-set order.

    State 0 is always the all-idle state. ``n_s`` holds the transmitter
    count of each state and ``membership_index`` lists, per link, the
    indices of the states in which that link transmits.
    """

    graph: ContentionGraph
    masks: np.ndarray
    n_s: np.ndarray
    membership_index: tuple[np.ndarray, ...] = field(repr=False)

    @property
    def num_states(self) -> int:
        return len(self.masks)

    def state(self, index: int) -> LinkState:
        _check_state_index(index, self.num_states)
        return LinkState(int(self.masks[index]), self.graph.num_links)

    def index_of(self, mask: int) -> int:
        """Index of a feasible state mask; raises if the mask is not a state."""
        pos = int(np.searchsorted(self.masks, np.uint64(mask)))
        if pos == self.num_states or int(self.masks[pos]) != mask:
            raise IndexOutOfRangeError(f"mask {mask:#x} is not a feasible state")
        return pos


@dataclass(frozen=True)
class CommunicationResult:
    """Outcome of the all-states-communicate check.

    ``unreachable`` lists state indices with no single-flip path from the
    all-idle state; it is the failure witness and empty on success.
    """

    communicating: bool
    unreachable: tuple[int, ...]

    def __bool__(self) -> bool:
        return self.communicating


def _check_link(link: int, num_links: int) -> None:
    if not 1 <= link <= num_links:
        raise IndexOutOfRangeError(
            f"link {link} outside [1, {num_links}]"
        )


def _check_state_index(index: int, num_states: int) -> None:
    if not 0 <= index < num_states:
        raise IndexOutOfRangeError(
            f"state index {index} outside [0, {num_states})"
        )


def build_graph(
    num_links: int, edge_list: Iterable[tuple[int, int]]
) -> ContentionGraph:
    """Build a contention graph from 1-based edge pairs.

    Edges are deduplicated (including reversed duplicates); self-loops
    and out-of-range endpoints are rejected.
    """
    if num_links < 1:
        raise IndexOutOfRangeError("num_links must be >= 1")
    if num_links > MAX_LINKS:
        raise TooManyLinksError(
            f"{num_links} links exceed the {MAX_LINKS}-link bit-set limit"
        )
    neighbor_sets: list[set[int]] = [set() for _ in range(num_links)]
    edges: set[tuple[int, int]] = set()
    for u, v in edge_list:
        u, v = int(u), int(v)
        _check_link(u, num_links)
        _check_link(v, num_links)
        if u == v:
            raise SelfLoopError(f"edge ({u}, {v}) is a self-loop")
        if u > v:
            u, v = v, u
        edges.add((u, v))
        neighbor_sets[u - 1].add(v)
        neighbor_sets[v - 1].add(u)
    return ContentionGraph(
        num_links=num_links,
        edges=tuple(sorted(edges)),
        adjacency=tuple(frozenset(s) for s in neighbor_sets),
    )


def remove_zero_load_links(
    graph: ContentionGraph, loads: Sequence[float]
) -> tuple[ContentionGraph, dict[int, int]]:
    """Drop links with zero offered load, along with their edges.

    A link with nothing to send never competes for the channel, so it can
    be deleted before any analysis; its throughput is zero by definition.

    Returns the reduced graph plus the index map from surviving original
    labels to their new 1-based labels. The reduced graph may be empty
    (num_links 0 is represented by a 0-link sentinel not valid for
    further analysis; callers should special-case an empty map).
    """
    f = np.asarray(loads, dtype=float)
    if f.shape != (graph.num_links,):
        raise IndexOutOfRangeError(
            f"loads length {f.shape} does not match {graph.num_links} links"
        )
    if np.any(f < 0) or not np.all(np.isfinite(f)):
        raise ValueError("offered loads must be finite and >= 0")
    kept = [i + 1 for i in range(graph.num_links) if f[i] > 0.0]
    index_map = {old: new for new, old in enumerate(kept, start=1)}
    if len(kept) == graph.num_links:
        return graph, index_map
    if not kept:
        return (
            ContentionGraph(num_links=0, edges=(), adjacency=()),
            index_map,
        )
    edges = [
        (index_map[u], index_map[v])
        for u, v in graph.edges
        if u in index_map and v in index_map
    ]
    return build_graph(len(kept), edges), index_map


def enumerate_independent_sets(
    graph: ContentionGraph, *, max_states: int = DEFAULT_STATE_CAP
) -> StateSpace:
    """Enumerate every independent set of the graph as a StateSpace.

    Depth-first extension over links, pruning any candidate adjacent to
    the set built so far. States come out in ascending bit-set order, so
    the all-idle state is index 0. Raises StateSpaceTooLargeError as soon
    as the count would exceed ``max_states``.
    """
    n = graph.num_links
    if n == 0:
        raise IndexOutOfRangeError("cannot enumerate an empty graph")
    adj = graph.adjacency_masks
    masks: list[int] = []
    # Decide links from highest label down so that lower bits vary fastest:
    # the emitted sequence is then already sorted by bit-set value.
    stack: list[tuple[int, int]] = [(n, 0)]
    while stack:
        link, mask = stack.pop()
        if link == 0:
            if len(masks) >= max_states:
                raise StateSpaceTooLargeError(
                    f"more than {max_states} feasible states"
                )
            masks.append(mask)
            continue
        bit = 1 << (link - 1)
        if mask & adj[link - 1] == 0:
            stack.append((link - 1, mask | bit))
        stack.append((link - 1, mask))
    mask_arr = np.array(masks, dtype=np.uint64)
    n_s = np.empty(len(masks), dtype=np.uint8)
    for i, m in enumerate(masks):
        n_s[i] = m.bit_count()
    membership = tuple(
        np.nonzero((mask_arr >> np.uint64(i)) & np.uint64(1))[0].astype(np.int64)
        for i in range(n)
    )
    return StateSpace(
        graph=graph, masks=mask_arr, n_s=n_s, membership_index=membership
    )


def state_transition_neighbors(space: StateSpace, state_index: int) -> tuple[int, ...]:
    """Indices of all feasible states one link flip away.

    Removing a transmitting link is always feasible; adding one is
    feasible only when none of its neighbors transmit.
    """
    _check_state_index(state_index, space.num_states)
    mask = int(space.masks[state_index])
    adj = space.graph.adjacency_masks
    out = []
    for i in range(space.graph.num_links):
        bit = 1 << i
        if mask & bit:
            out.append(space.index_of(mask ^ bit))
        elif mask & adj[i] == 0:
            out.append(space.index_of(mask | bit))
    return tuple(out)


def is_strongly_communicating(space: StateSpace) -> CommunicationResult:
    """Check that every state pair communicates in the flip graph.

    Each single-link flip is reversible, so connectivity of the whole
    transition graph is equivalent to reachability from the all-idle
    state, which is what breadth-first search verifies here.
    """
    seen = np.zeros(space.num_states, dtype=bool)
    seen[0] = True
    frontier = deque([0])
    while frontier:
        idx = frontier.popleft()
        for nxt in state_transition_neighbors(space, idx):
            if not seen[nxt]:
                seen[nxt] = True
                frontier.append(nxt)
    unreachable = tuple(int(i) for i in np.nonzero(~seen)[0])
    return CommunicationResult(communicating=not unreachable, unreachable=unreachable)


def parse_graph_text(text: str) -> ContentionGraph:
    """Parse the canonical graph text format.

    First non-comment line holds the link count; every following
    non-empty, non-``#`` line holds one 1-based edge ``u v``.
    """
    num_links: int | None = None
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if num_links is None:
            if len(fields) != 1:
                raise ValueError(f"line {lineno}: expected the link count")
            num_links = int(fields[0])
            continue
        if len(fields) != 2:
            raise ValueError(f"line {lineno}: expected 'u v'")
        edges.append((int(fields[0]), int(fields[1])))
    if num_links is None:
        raise ValueError("empty graph file")
    return build_graph(num_links, edges)


def format_graph_text(graph: ContentionGraph) -> str:
    """Render a graph in the canonical text format (sorted edges, LF)."""
    lines = [str(graph.num_links)]
    lines.extend(f"{u} {v}" for u, v in graph.edges)
    return "\n".join(lines) + "\n"
