"""Communication graph model: construction, validation, and spectral data.

Agent indices are 1-based in every public interface; ndarray rows/columns
use the usual 0-based offsets internally.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DisconnectedGraphError,
    IndexOutOfRangeError,
    MalformedEdgeError,
    TooFewAgentsError,
)

__all__ = [
    "Graph",
    "Spectrum",
    "build_graph",
    "graph_from_descriptor",
    "neighbors",
    "spectrum",
    "random_connected_graph",
]


@dataclass(frozen=True)
class Graph:
    """Undirected communication graph with binary symmetric adjacency.

    ``edges`` holds unordered pairs ``(i, j)`` with ``i < j``, 1-based.
    Instances are immutable and safe to share across threads.
    """

    n: int
    edges: frozenset[tuple[int, int]]
    _neighbor_table: tuple[tuple[int, ...], ...] = field(repr=False, compare=False, default=())

    def __post_init__(self) -> None:
        table: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            table[i - 1].append(j)
            table[j - 1].append(i)
        object.__setattr__(
            self, "_neighbor_table", tuple(tuple(sorted(row)) for row in table)
        )

    def neighbors(self, i: int) -> tuple[int, ...]:
        """Sorted neighbor indices of agent ``i`` (1-based)."""
        if not 1 <= i <= self.n:
            raise IndexOutOfRangeError(f"agent index {i} outside [1, {self.n}]")
        return self._neighbor_table[i - 1]

    def degree(self, i: int) -> int:
        return len(self.neighbors(i))

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for i, j in self.edges:
            a[i - 1, j - 1] = 1.0
            a[j - 1, i - 1] = 1.0
        return a

    def laplacian(self) -> np.ndarray:
        a = self.adjacency()
        return np.diag(a.sum(axis=1)) - a


@dataclass(frozen=True)
class Spectrum:
    """Laplacian eigen-data of a connected graph."""

    laplacian: np.ndarray
    eigenvalues: np.ndarray  # sorted ascending; eigenvalues[0] ~ 0
    lambda2: float
    lambda_max: float


def build_graph(kind: str, n: int, edges=None) -> Graph:
    """Construct and validate a graph from a topology descriptor.

    ``kind`` is one of ``ring``, ``path``, ``complete``, ``custom``; the
    ``custom`` kind takes an explicit edge list of 1-based pairs.
    """
    if n < 3:
        raise TooFewAgentsError(f"need at least 3 agents, got {n}")
    if kind == "ring":
        pairs = [(i, i + 1) for i in range(1, n)] + [(1, n)]
    elif kind == "path":
        pairs = [(i, i + 1) for i in range(1, n)]
    elif kind == "complete":
        pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    elif kind == "custom":
        if edges is None:
            raise MalformedEdgeError("custom topology requires an edge list")
        pairs = [_check_pair(e, n) for e in edges]
    else:
        raise MalformedEdgeError(f"unknown topology kind {kind!r}")

    edge_set = frozenset((min(i, j), max(i, j)) for i, j in pairs)
    g = Graph(n=n, edges=edge_set)
    if not _is_connected(g):
        raise DisconnectedGraphError(f"graph with {n} agents and {len(edge_set)} edges is disconnected")
    return g


def graph_from_descriptor(descriptor: dict) -> Graph:
    """Build a graph from the JSON topology descriptor form."""
    kind = descriptor.get("kind")
    n = descriptor.get("n")
    if not isinstance(kind, str) or not isinstance(n, int):
        raise MalformedEdgeError(f"bad topology descriptor: {descriptor!r}")
    return build_graph(kind, n, descriptor.get("edges"))


def _check_pair(e, n: int) -> tuple[int, int]:
    try:
        i, j = e
    except (TypeError, ValueError):
        raise MalformedEdgeError(f"edge {e!r} is not a pair") from None
    if not (isinstance(i, int) and isinstance(j, int)):
        raise MalformedEdgeError(f"edge {e!r} has non-integer endpoints")
    if i == j:
        raise MalformedEdgeError(f"self-loop at agent {i}")
    if not (1 <= i <= n and 1 <= j <= n):
        raise MalformedEdgeError(f"edge {e!r} outside [1, {n}]")
    return i, j


def _is_connected(g: Graph) -> bool:
    seen = {1}
    stack = [1]
    while stack:
        for j in g.neighbors(stack.pop()):
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return len(seen) == g.n


def neighbors(g: Graph, i: int) -> list[int]:
    """Sorted neighbors of agent ``i``; symmetric by construction."""
    return list(g.neighbors(i))


def spectrum(g: Graph) -> Spectrum:
    """Dense symmetric eigen-decomposition of the graph Laplacian.

    Agent counts here are desk-scale, so a dense solver is adequate.
    """
    lap = g.laplacian()
    eigenvalues = np.linalg.eigvalsh(lap)
    return Spectrum(
        laplacian=lap,
        eigenvalues=eigenvalues,
        lambda2=float(eigenvalues[1]),
        lambda_max=float(eigenvalues[-1]),
    )


def random_connected_graph(n: int, rng: np.random.Generator, extra_edges: int = 2) -> Graph:
    """Random connected graph: a random spanning tree plus a few extra edges."""
    if n < 3:
        raise TooFewAgentsError(f"need at least 3 agents, got {n}")
    order = rng.permutation(n) + 1
    pairs = set()
    for k in range(1, n):
        anchor = order[rng.integers(0, k)]
        pairs.add((min(int(order[k]), int(anchor)), max(int(order[k]), int(anchor))))
    for _ in range(extra_edges):
        i, j = rng.integers(1, n + 1, size=2)
        if i != j:
            pairs.add((min(int(i), int(j)), max(int(i), int(j))))
    return build_graph("custom", n, sorted(pairs))
