"""Attacker models and the constructive indistinguishability experiments.

The eavesdropper is an exact algebraic inverter. From the update rule,
``d/dt xhat = d/dt x_m - beta * L xhat`` with ``xhat(0) = x_m(0)``, so

    x_m(t) = xhat(t) + beta * integral_0^t L xhat(tau) dtau,

and the integral is evaluated by trapezoidal quadrature on the recorded
transcript. Whatever a masked run hides from this inverter is hidden from
any weaker observer. A curious coalition applies the same inversion and
subtracts the mask terms it learned on its own incident edges.

The two experiment functions build the alternative executions behind the
privacy arguments: shift every reference by a zero-sum vector while
shifting masks oppositely, or shift a single unobserved pairwise draw while
shifting the two adjacent references. Mask arithmetic is exact (see
``masking``), so both alternatives feed the simulator bit-identical inputs
and the recorded transcripts must match bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .engine import EngineConfig, Transcript, simulate_masked
from .errors import (
    IndexOutOfRangeError,
    NeighborInCoalitionError,
    NonUniformSamplingError,
    NotAnEdgeError,
    NotZeroSumError,
    TargetInCoalitionError,
)
from .masking import ExchangeMatrix, MaskVector, compute_masks, mask_bank
from .signals import SignalBank, SinusoidSpec, evaluate, shift_offsets
from .topology import Graph

__all__ = [
    "EavesdropperView",
    "CoalitionView",
    "AttackReport",
    "ShiftExperimentResult",
    "EdgeShiftExperimentResult",
    "RESIDUAL_CONSTANT_TOLERANCE",
    "build_eavesdropper_view",
    "build_coalition_view",
    "eavesdrop_reconstruct",
    "eavesdrop_report",
    "coalition_split_mask",
    "coalition_infer",
    "reference_shift_experiment",
    "edge_draw_shift_experiment",
]

# A residual counts as constant when it stays this close to its fitted mean.
RESIDUAL_CONSTANT_TOLERANCE = 5e-3


@dataclass(frozen=True)
class EavesdropperView:
    """Everything a wiretapper sees: topology, gain, and the broadcasts.

    Deliberately holds no exchange values, masks, or reference signals.
    """

    graph: Graph
    beta: float
    transcript: Transcript


@dataclass(frozen=True)
class CoalitionView:
    """Pooled knowledge of colluding protocol-compliant agents.

    On top of the wiretap data the coalition knows its members' own signals
    and the pairwise draws on edges incident to a member.
    """

    coalition: frozenset[int]
    graph: Graph
    beta: float
    transcript: Transcript
    own_signals: Mapping[int, SinusoidSpec]
    incident_draws: Mapping[tuple[int, int], float]


@dataclass(frozen=True)
class AttackReport:
    """Outcome of one reconstruction attempt against one target agent."""

    target: int
    coalition: frozenset[int]
    times: np.ndarray
    estimate: np.ndarray
    truth: np.ndarray
    residual: np.ndarray
    fitted_constant: float
    max_wobble: float
    residual_is_constant: bool
    v_known: float


@dataclass(frozen=True)
class ShiftExperimentResult:
    """Paired executions under a zero-sum reference shift."""

    transcript_a: Transcript
    transcript_b: Transcript
    transcripts_equal: bool
    masks_a: MaskVector
    masks_b: MaskVector


@dataclass(frozen=True)
class EdgeShiftExperimentResult:
    """Paired executions under a single-edge draw shift, attacked by a coalition."""

    transcript_a: Transcript
    transcript_b: Transcript
    transcripts_equal: bool
    estimate_a: np.ndarray
    estimate_b: np.ndarray
    estimates_equal: bool
    masks_a: MaskVector
    masks_b: MaskVector
    reference_delta_at_target: float


def build_eavesdropper_view(g: Graph, beta: float, transcript: Transcript) -> EavesdropperView:
    return EavesdropperView(graph=g, beta=beta, transcript=transcript)


def build_coalition_view(
    g: Graph,
    beta: float,
    transcript: Transcript,
    bank: SignalBank,
    exchange: ExchangeMatrix,
    coalition,
) -> CoalitionView:
    """Carve the coalition's information set out of a full scenario."""
    members = frozenset(int(h) for h in coalition)
    for h in members:
        if not 1 <= h <= g.n:
            raise IndexOutOfRangeError(f"coalition member {h} outside [1, {g.n}]")
    own = {h: bank.signals[h - 1] for h in members}
    draws: dict[tuple[int, int], float] = {}
    for i, j in sorted(g.edges):
        if i in members or j in members:
            draws[(i, j)] = float(exchange.value(i, j))
            draws[(j, i)] = float(exchange.value(j, i))
    return CoalitionView(
        coalition=members,
        graph=g,
        beta=beta,
        transcript=transcript,
        own_signals=own,
        incident_draws=draws,
    )


def _check_uniform(times: np.ndarray) -> float:
    if times.size < 2:
        raise NonUniformSamplingError("need at least two samples to integrate")
    steps = np.diff(times)
    step = float(steps[0])
    if np.abs(steps - step).max() > 1e-9 * step:
        raise NonUniformSamplingError("transcript samples are not uniformly spaced")
    return step


def eavesdrop_reconstruct(view: EavesdropperView) -> np.ndarray:
    """Best-possible reconstruction of every agent's masked reference.

    Returns an array aligned with the transcript; column ``i-1`` converges
    to ``x_m_i(t)`` up to trapezoidal quadrature error.
    """
    step = _check_uniform(view.transcript.times)
    states = view.transcript.states
    flux = states @ (view.beta * view.graph.laplacian()).T
    return states + cumulative_trapezoid(flux, dx=step, axis=0, initial=0.0)


def _fit_residual(
    times: np.ndarray, residual: np.ndarray, window_start: float
) -> tuple[float, float, bool]:
    window = times >= min(window_start, float(times[-1]))
    fitted = float(residual[window].mean())
    wobble = float(np.abs(residual[window] - fitted).max())
    return fitted, wobble, wobble < RESIDUAL_CONSTANT_TOLERANCE


def eavesdrop_report(
    view: EavesdropperView, truth_bank: SignalBank, window_start: float = 1.0
) -> list[AttackReport]:
    """Score the eavesdropper against the true references (one report per agent).

    ``truth_bank`` is experiment-side ground truth for scoring only; the
    reconstruction itself reads nothing but the view.
    """
    estimates = eavesdrop_reconstruct(view)
    times = view.transcript.times
    truth = evaluate(truth_bank, times)
    reports = []
    for i in range(1, view.graph.n + 1):
        residual = estimates[:, i - 1] - truth[:, i - 1]
        fitted, wobble, constant = _fit_residual(times, residual, window_start)
        reports.append(
            AttackReport(
                target=i,
                coalition=frozenset(),
                times=times,
                estimate=estimates[:, i - 1],
                truth=truth[:, i - 1],
                residual=residual,
                fitted_constant=fitted,
                max_wobble=wobble,
                residual_is_constant=constant,
                v_known=0.0,
            )
        )
    return reports


def coalition_split_mask(view: CoalitionView, target: int) -> tuple[float, list[tuple[int, int]]]:
    """Split the target's mask into the part the coalition knows and the rest.

    Returns the known part (sum of received-minus-sent over the target's
    colluding neighbors) and the target's edges to legitimate neighbors,
    whose draws stay unknown.
    """
    g = view.graph
    if target in view.coalition:
        raise TargetInCoalitionError(f"agent {target} is in the coalition")
    if not 1 <= target <= g.n:
        raise IndexOutOfRangeError(f"agent index {target} outside [1, {g.n}]")
    v_known = 0.0
    unknown_edges: list[tuple[int, int]] = []
    for j in g.neighbors(target):
        if j in view.coalition:
            v_known += view.incident_draws[(j, target)] - view.incident_draws[(target, j)]
        else:
            unknown_edges.append((min(target, j), max(target, j)))
    return v_known, unknown_edges


def _coalition_estimate(view: CoalitionView, target: int) -> np.ndarray:
    """The coalition's best estimate of the target's reference trajectory."""
    v_known, _ = coalition_split_mask(view, target)
    inverter = EavesdropperView(graph=view.graph, beta=view.beta, transcript=view.transcript)
    return eavesdrop_reconstruct(inverter)[:, target - 1] - v_known


def coalition_infer(
    view: CoalitionView, target: int, truth_bank: SignalBank, window_start: float = 1.0
) -> AttackReport:
    """Run the coalition attack and score it against the true reference.

    The estimate equals ``x_target(t)`` plus the unknown mask part; when
    every neighbor of the target colludes the unknown part is zero and the
    recovery is exact up to quadrature error.
    """
    estimate = _coalition_estimate(view, target)
    v_known, _ = coalition_split_mask(view, target)
    times = view.transcript.times
    truth = evaluate(truth_bank, times)[:, target - 1]
    residual = estimate - truth
    fitted, wobble, constant = _fit_residual(times, residual, window_start)
    return AttackReport(
        target=target,
        coalition=view.coalition,
        times=times,
        estimate=estimate,
        truth=truth,
        residual=residual,
        fitted_constant=fitted,
        max_wobble=wobble,
        residual_is_constant=constant,
        v_known=v_known,
    )


def reference_shift_experiment(
    g: Graph,
    bank: SignalBank,
    exchange: ExchangeMatrix,
    shift,
    cfg: EngineConfig,
) -> ShiftExperimentResult:
    """Run the original execution against one shifted by a zero-sum vector.

    The alternative adds ``shift`` to the reference offsets and subtracts it
    from the masks (applied directly to the mask vector; a zero-sum shift
    need not decompose along single edges). Both executions present the
    same masked references, so their transcripts must be bit-identical.
    """
    shift = np.asarray(shift, dtype=float)
    if shift.shape != (g.n,):
        raise NotZeroSumError(f"shift has shape {shift.shape}, expected ({g.n},)")
    if abs(math.fsum(shift.tolist())) > 1e-12:
        raise NotZeroSumError(f"shift sums to {math.fsum(shift.tolist()):.3e}, not zero")
    masks_a = compute_masks(exchange)
    masks_b = masks_a.shifted(-shift)
    run_a = simulate_masked(g, mask_bank(bank, masks_a), cfg)
    run_b = simulate_masked(g, mask_bank(shift_offsets(bank, shift), masks_b), cfg)
    return ShiftExperimentResult(
        transcript_a=run_a.transcript,
        transcript_b=run_b.transcript,
        transcripts_equal=run_a.transcript.equals(run_b.transcript),
        masks_a=masks_a,
        masks_b=masks_b,
    )


def edge_draw_shift_experiment(
    g: Graph,
    bank: SignalBank,
    exchange: ExchangeMatrix,
    target: int,
    neighbor: int,
    r: float,
    coalition,
    cfg: EngineConfig,
) -> EdgeShiftExperimentResult:
    """Shift one unobserved pairwise draw and rerun; attack both executions.

    ``neighbor`` must be a legitimate (non-colluding) neighbor of the
    target. The alternative adds ``r`` to the draw the target sent on that
    edge and shifts the two adjacent references by ``+r`` / ``-r``. The
    coalition's view is unchanged, so transcripts and coalition estimates
    must both come out identical while the target's true reference differs
    by ``r``.
    """
    members = frozenset(int(h) for h in coalition)
    if target in members:
        raise TargetInCoalitionError(f"target {target} is in the coalition")
    if not g.has_edge(target, neighbor):
        raise NotAnEdgeError(f"({target}, {neighbor}) is not an edge")
    if neighbor in members:
        raise NeighborInCoalitionError(f"agent {neighbor} is in the coalition")

    exchange_b = exchange.with_added(target, neighbor, r)
    masks_a = compute_masks(exchange)
    masks_b = compute_masks(exchange_b)

    shift = np.zeros(g.n)
    shift[target - 1] = r
    shift[neighbor - 1] = -r
    bank_b = shift_offsets(bank, shift)

    run_a = simulate_masked(g, mask_bank(bank, masks_a), cfg)
    run_b = simulate_masked(g, mask_bank(bank_b, masks_b), cfg)

    view_a = build_coalition_view(g, cfg.beta, run_a.transcript, bank, exchange, members)
    view_b = build_coalition_view(g, cfg.beta, run_b.transcript, bank_b, exchange_b, members)
    est_a = _coalition_estimate(view_a, target)
    est_b = _coalition_estimate(view_b, target)

    return EdgeShiftExperimentResult(
        transcript_a=run_a.transcript,
        transcript_b=run_b.transcript,
        transcripts_equal=run_a.transcript.equals(run_b.transcript),
        estimate_a=est_a,
        estimate_b=est_b,
        estimates_equal=bool(np.array_equal(est_a, est_b)),
        masks_a=masks_a,
        masks_b=masks_b,
        reference_delta_at_target=bank_b.signals[target - 1].offset
        - bank.signals[target - 1].offset,
    )
