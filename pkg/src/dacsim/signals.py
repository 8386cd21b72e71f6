"""Per-agent reference signals: parametric sinusoids with analytic derivatives.

Only sinusoids (plus constant offsets) are supported; they are bounded with
bounded derivatives by construction, which is all the tracking analysis
needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .errors import ConfigError, LengthMismatchError

__all__ = [
    "SinusoidSpec",
    "SignalBank",
    "evaluate",
    "evaluate_derivative",
    "compute_gamma",
    "common_period",
    "shift_offsets",
]


@dataclass(frozen=True)
class SinusoidSpec:
    """One signal ``amplitude * trig(omega * t + phase) + offset``.

    ``kind`` selects the trig function (``sin`` or ``cos``); angles are in
    radians.
    """

    kind: str
    amplitude: float
    omega: float
    phase: float = 0.0
    offset: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("sin", "cos"):
            raise ConfigError(f"signal kind must be 'sin' or 'cos', got {self.kind!r}")
        for name in ("amplitude", "omega", "phase", "offset"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"signal parameter {name} is not finite")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "amplitude": self.amplitude,
            "omega": self.omega,
            "phase": self.phase,
            "offset": self.offset,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SinusoidSpec":
        try:
            return cls(
                kind=d["kind"],
                amplitude=float(d["amplitude"]),
                omega=float(d["omega"]),
                phase=float(d.get("phase", 0.0)),
                offset=float(d.get("offset", 0.0)),
            )
        except KeyError as exc:
            raise ConfigError(f"signal spec missing field {exc}") from None


@dataclass(frozen=True)
class SignalBank:
    """One sinusoid per agent; length must match the graph's agent count."""

    signals: tuple[SinusoidSpec, ...]

    @property
    def n(self) -> int:
        return len(self.signals)

    def require_length(self, n: int) -> None:
        if self.n != n:
            raise LengthMismatchError(f"bank has {self.n} signals, expected {n}")

    def amplitudes(self) -> np.ndarray:
        return np.array([s.amplitude for s in self.signals])

    def omegas(self) -> np.ndarray:
        return np.array([s.omega for s in self.signals])

    def phases(self) -> np.ndarray:
        return np.array([s.phase for s in self.signals])

    def offsets(self) -> np.ndarray:
        return np.array([s.offset for s in self.signals])

    def is_cos(self) -> np.ndarray:
        return np.array([s.kind == "cos" for s in self.signals], dtype=bool)


def evaluate(bank: SignalBank, t) -> np.ndarray:
    """Signal values at time(s) ``t``; shape ``t.shape + (n,)``."""
    t = np.asarray(t, dtype=float)
    arg = np.multiply.outer(t, bank.omegas()) + bank.phases()
    trig = np.where(bank.is_cos(), np.cos(arg), np.sin(arg))
    return bank.amplitudes() * trig + bank.offsets()


def evaluate_derivative(bank: SignalBank, t) -> np.ndarray:
    """Exact analytic time derivative at time(s) ``t``."""
    t = np.asarray(t, dtype=float)
    arg = np.multiply.outer(t, bank.omegas()) + bank.phases()
    aw = bank.amplitudes() * bank.omegas()
    return np.where(bank.is_cos(), -aw * np.sin(arg), aw * np.cos(arg))


def compute_gamma(bank: SignalBank, horizon: float, sample_step: float) -> float:
    """Peak 2-norm of the mean-removed derivative vector over ``[0, horizon]``.

    Dense sampling at ``sample_step``; non-decreasing in ``horizon``. The
    caller should pass a horizon covering the signals' common period (see
    :func:`common_period`) so the sampled peak is the true one.
    """
    ts = np.arange(0.0, horizon + sample_step, sample_step)
    d = evaluate_derivative(bank, ts)
    centered = d - d.mean(axis=1, keepdims=True)
    return float(np.linalg.norm(centered, axis=1).max())


def common_period(bank: SignalBank, max_multiple: float = 16.0) -> float:
    """Common period of the bank's oscillating components.

    Exact when the frequencies are commensurate (rational ratios); otherwise
    falls back to ``max_multiple`` times the slowest period. Constant
    signals (zero amplitude or zero frequency) contribute no constraint; an
    all-constant bank reports a nominal period of 1.
    """
    omegas = [abs(s.omega) for s in bank.signals if s.amplitude != 0.0 and s.omega != 0.0]
    if not omegas:
        return 1.0
    fracs = [Fraction(w).limit_denominator(10**6) for w in omegas]
    gcd = fracs[0]
    for f in fracs[1:]:
        gcd = Fraction(math.gcd(gcd.numerator, f.numerator), math.lcm(gcd.denominator, f.denominator))
    period = 2.0 * math.pi / float(gcd)
    slowest = 2.0 * math.pi / min(omegas)
    if period > max_multiple * slowest:
        return max_multiple * slowest
    return period


def shift_offsets(bank: SignalBank, delta) -> SignalBank:
    """New bank with ``delta[i]`` added to each agent's constant offset."""
    delta = np.asarray(delta, dtype=float)
    if delta.shape != (bank.n,):
        raise LengthMismatchError(f"shift has shape {delta.shape}, expected ({bank.n},)")
    return SignalBank(
        signals=tuple(
            replace(s, offset=s.offset + float(d)) for s, d in zip(bank.signals, delta)
        )
    )
