"""Mask synthesis: pairwise random exchange, per-agent masks, masked banks.

Each agent draws one random value per neighbor and the two endpoints of
every edge swap their draws over a private channel (modeled here simply by
excluding the draws from the eavesdropper's view). Agent ``i``'s mask is
``sum_j (received_ji - sent_ij)`` over its neighbors, so the masks cancel
network-wide.

Exchange values and masks are kept as exact dyadic rationals
(``fractions.Fraction`` of the stored doubles) alongside their float views.
Mask arithmetic is therefore exact, and a masked bank folds each agent's
offset and mask into a single constant with one final rounding. That makes
algebraically-equal decompositions ``(x, m)`` and ``(x + s, m - s)`` produce
bit-identical simulator inputs, which the indistinguishability experiments
rely on.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    LengthMismatchError,
    NonPositiveRangeError,
    NotAnEdgeError,
    SparsityViolationError,
)
from .signals import SignalBank, SinusoidSpec
from .topology import Graph

__all__ = [
    "ExchangeMatrix",
    "MaskVector",
    "MaskedBank",
    "draw_exchange",
    "load_exchange",
    "compute_masks",
    "mask_bank",
    "remask",
]


@dataclass(frozen=True)
class ExchangeMatrix:
    """Pairwise random values: entry ``(i, j)`` is what agent i drew for j.

    ``exact`` maps 1-based directed edges to the exact rational value;
    entries are zero (absent) on non-edges and the diagonal.
    """

    graph: Graph
    exact: dict[tuple[int, int], Fraction]

    @property
    def n(self) -> int:
        return self.graph.n

    def value(self, i: int, j: int) -> Fraction:
        return self.exact.get((i, j), Fraction(0))

    def values(self) -> np.ndarray:
        """Dense float view (rounded per entry); zeros at non-edges."""
        out = np.zeros((self.n, self.n))
        for (i, j), v in self.exact.items():
            out[i - 1, j - 1] = float(v)
        return out

    def with_added(self, i: int, j: int, r: float) -> "ExchangeMatrix":
        """Copy with ``r`` added exactly to the single directed entry ``(i, j)``."""
        if not self.graph.has_edge(i, j):
            raise NotAnEdgeError(f"({i}, {j}) is not an edge")
        exact = dict(self.exact)
        exact[(i, j)] = exact.get((i, j), Fraction(0)) + Fraction(r)
        return ExchangeMatrix(graph=self.graph, exact=exact)


@dataclass(frozen=True)
class MaskVector:
    """Per-agent constant masks; ``values`` is the rounded view of ``exact``.

    Masks built by :func:`compute_masks` sum to zero exactly in the rational
    representation. They are constant for the lifetime of a topology epoch;
    a topology change requires :func:`remask`.
    """

    values: np.ndarray
    exact: tuple[Fraction, ...]

    @property
    def n(self) -> int:
        return len(self.exact)

    def exact_sum(self) -> Fraction:
        return sum(self.exact, Fraction(0))

    def shifted(self, delta) -> "MaskVector":
        """New masks with ``delta`` added exactly, componentwise."""
        delta = np.asarray(delta, dtype=float)
        if delta.shape != (self.n,):
            raise LengthMismatchError(f"shift has shape {delta.shape}, expected ({self.n},)")
        exact = tuple(e + Fraction(float(d)) for e, d in zip(self.exact, delta))
        return MaskVector(values=np.array([float(e) for e in exact]), exact=exact)

    @classmethod
    def zeros(cls, n: int) -> "MaskVector":
        return cls(values=np.zeros(n), exact=tuple(Fraction(0) for _ in range(n)))

    @classmethod
    def from_floats(cls, values) -> "MaskVector":
        values = np.asarray(values, dtype=float)
        return cls(values=values, exact=tuple(Fraction(float(v)) for v in values))


@dataclass(frozen=True)
class MaskedBank:
    """A signal bank with constant masks applied.

    ``folded`` is the bank actually fed to the simulator: each spec's offset
    is ``round(offset + mask)`` computed in exact rational arithmetic with a
    single final rounding, so the masked value at ``(i, t)`` is the base
    value plus ``masks[i]`` up to that one rounding. Derivatives are
    untouched (masks are constants).
    """

    base: SignalBank
    masks: MaskVector
    folded: SignalBank

    @property
    def n(self) -> int:
        return self.base.n


def draw_exchange(g: Graph, rng: np.random.Generator, half_width: float = 10.0) -> ExchangeMatrix:
    """Draw one independent value per directed edge, uniform on ``[-w, +w]``.

    Draw order is fixed (edges sorted, low endpoint first), so a given seed
    reproduces the matrix bit-for-bit.
    """
    if not half_width > 0.0:
        raise NonPositiveRangeError(f"half_width must be > 0, got {half_width}")
    exact: dict[tuple[int, int], Fraction] = {}
    for i, j in sorted(g.edges):
        exact[(i, j)] = Fraction(float(rng.uniform(-half_width, half_width)))
        exact[(j, i)] = Fraction(float(rng.uniform(-half_width, half_width)))
    return ExchangeMatrix(graph=g, exact=exact)


def load_exchange(g: Graph, matrix) -> ExchangeMatrix:
    """Validate an explicit dense matrix against the graph's sparsity."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (g.n, g.n):
        raise SparsityViolationError(f"matrix shape {matrix.shape} does not match n={g.n}")
    exact: dict[tuple[int, int], Fraction] = {}
    for i in range(1, g.n + 1):
        for j in range(1, g.n + 1):
            v = float(matrix[i - 1, j - 1])
            if v == 0.0:
                continue
            if i == j or not g.has_edge(i, j):
                raise SparsityViolationError(f"nonzero entry at non-edge ({i}, {j})")
            exact[(i, j)] = Fraction(v)
    return ExchangeMatrix(graph=g, exact=exact)


def compute_masks(exchange: ExchangeMatrix) -> MaskVector:
    """Per-agent mask: received minus sent, summed over neighbors.

    Summation runs in ascending neighbor order using exact rationals; every
    draw appears once positively and once negatively across the network, so
    the masks sum to zero exactly.
    """
    g = exchange.graph
    exact = []
    for i in range(1, g.n + 1):
        acc = Fraction(0)
        for j in g.neighbors(i):
            acc += exchange.value(j, i) - exchange.value(i, j)
        exact.append(acc)
    return MaskVector(values=np.array([float(e) for e in exact]), exact=tuple(exact))


def mask_bank(bank: SignalBank, masks: MaskVector) -> MaskedBank:
    """Apply constant masks to a bank by folding them into the offsets."""
    if bank.n != masks.n:
        raise LengthMismatchError(f"bank has {bank.n} signals, masks have {masks.n}")
    folded_specs = []
    for spec, m_exact in zip(bank.signals, masks.exact):
        folded_offset = float(Fraction(spec.offset) + m_exact)
        folded_specs.append(
            SinusoidSpec(
                kind=spec.kind,
                amplitude=spec.amplitude,
                omega=spec.omega,
                phase=spec.phase,
                offset=folded_offset,
            )
        )
    return MaskedBank(base=bank, masks=masks, folded=SignalBank(signals=tuple(folded_specs)))


def remask(
    g_new: Graph, rng: np.random.Generator, half_width: float = 10.0
) -> tuple[ExchangeMatrix, MaskVector]:
    """Fresh exchange and masks after a topology change; old masks are void."""
    exchange = draw_exchange(g_new, rng, half_width)
    return exchange, compute_masks(exchange)
