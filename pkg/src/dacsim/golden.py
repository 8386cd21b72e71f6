"""The bundled six-agent golden scenario used across tests and docs.

A ring of six agents with sinusoidal references, an explicit pairwise
exchange matrix, and gain 300. The derived masks are pinned here so fixture
drift is caught immediately.
"""

from __future__ import annotations

import math

import numpy as np

from .masking import ExchangeMatrix, MaskVector, MaskedBank, compute_masks, load_exchange, mask_bank
from .signals import SignalBank, SinusoidSpec
from .topology import Graph, build_graph

__all__ = [
    "GOLDEN_N",
    "GOLDEN_BETA",
    "GOLDEN_DT",
    "GOLDEN_T_FINAL",
    "GOLDEN_RECORD_EVERY",
    "GOLDEN_MASKS",
    "golden_graph",
    "golden_bank",
    "golden_exchange_values",
    "golden_exchange",
    "golden_masks",
    "golden_masked",
]

GOLDEN_N = 6
GOLDEN_BETA = 300.0
GOLDEN_DT = 1e-4
GOLDEN_T_FINAL = 30.0
GOLDEN_RECORD_EVERY = 10

GOLDEN_MASKS = np.array([14.85, -8.25, -9.35, 9.80, -3.25, -3.80])

_SIGNALS = (
    SinusoidSpec("sin", -7.0, 0.5, -2.0 * math.pi / 3.0),
    SinusoidSpec("sin", -6.5, 0.75, -math.pi / 3.0),
    SinusoidSpec("sin", -6.0, 1.0, 0.0),
    SinusoidSpec("cos", -5.5, 1.25, math.pi / 3.0),
    SinusoidSpec("cos", -5.0, 1.5, 2.0 * math.pi / 3.0),
    SinusoidSpec("cos", -4.5, 1.75, math.pi),
)

# Row i, column j: the value agent i drew for neighbor j on the ring.
_EXCHANGE_ROWS = (
    (0.0, 0.20, 0.0, 0.0, 0.0, -0.40),
    (6.75, 0.0, 1.10, 0.0, 0.0, 0.0),
    (0.0, -0.60, 0.0, 0.80, 0.0, 0.0),
    (0.0, 0.0, -10.25, 0.0, 0.50, 0.0),
    (0.0, 0.0, 0.0, -0.75, 0.0, 1.30),
    (7.90, 0.0, 0.0, 0.0, -3.20, 0.0),
)


def golden_graph() -> Graph:
    return build_graph("ring", GOLDEN_N)


def golden_bank() -> SignalBank:
    return SignalBank(signals=_SIGNALS)


def golden_exchange_values() -> np.ndarray:
    return np.array(_EXCHANGE_ROWS)


def golden_exchange() -> ExchangeMatrix:
    return load_exchange(golden_graph(), golden_exchange_values())


def golden_masks() -> MaskVector:
    return compute_masks(golden_exchange())


def golden_masked() -> MaskedBank:
    return mask_bank(golden_bank(), golden_masks())
