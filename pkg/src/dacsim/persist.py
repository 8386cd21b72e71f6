"""Deterministic CSV/JSON artifact writers.

Floats are rendered with ``repr`` (shortest round-trip form) and JSON keys
are sorted, so rerunning a seeded scenario reproduces every artifact byte
for byte. No timestamps or environment data are ever written.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .adversary import AttackReport
from .engine import RunResult
from .masking import MaskedBank
from .signals import SignalBank, evaluate

__all__ = [
    "fnum",
    "write_json",
    "write_run_csv",
    "write_run_sidecar",
    "write_decomposed_csv",
    "write_attack_csv",
    "attack_summary",
    "write_compare_csv",
]


def fnum(v) -> str:
    return repr(float(v))


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_run_csv(path: Path, result: RunResult, bank: SignalBank | MaskedBank) -> None:
    """Long-form run table: one row per (sample, agent)."""
    if isinstance(bank, MaskedBank):
        base, masked = bank.base, bank.folded
    else:
        base, masked = bank, bank
    times = result.transcript.times
    states = result.transcript.states
    true_ref = evaluate(base, times)
    masked_ref = evaluate(masked, times)
    lines = ["t,agent_id,xhat,x_true_ref,x_masked_ref,x_avg_true"]
    for k in range(times.size):
        t = fnum(times[k])
        avg = fnum(result.true_average[k])
        for i in range(base.n):
            lines.append(
                f"{t},{i + 1},{fnum(states[k, i])},{fnum(true_ref[k, i])},"
                f"{fnum(masked_ref[k, i])},{avg}"
            )
    path.write_text("\n".join(lines) + "\n")


def write_run_sidecar(path: Path, result: RunResult, fitted_rate: float | None) -> None:
    write_json(
        path,
        {
            "beta": result.beta,
            "dt": result.dt,
            "lambda2": result.lambda2,
            "gamma": result.gamma,
            "bound": result.bound,
            "fitted_rate": fitted_rate,
        },
    )


def write_decomposed_csv(path: Path, result: RunResult, bank: SignalBank) -> None:
    """Run table for the decomposed baseline, with a substate column."""
    times = result.transcript.times
    states = result.transcript.states
    n = bank.n
    true_ref = evaluate(bank, times)
    lines = ["t,agent_id,substate,xhat,x_true_ref,x_masked_ref,x_avg_true"]
    for k in range(times.size):
        t = fnum(times[k])
        avg = fnum(result.true_average[k])
        for col in range(2 * n):
            agent = col % n
            sub = "alpha" if col < n else "beta"
            ref = fnum(true_ref[k, agent])
            lines.append(f"{t},{agent + 1},{sub},{fnum(states[k, col])},{ref},{ref},{avg}")
    path.write_text("\n".join(lines) + "\n")


def write_attack_csv(path: Path, report: AttackReport) -> None:
    lines = ["t,estimate,truth,residual"]
    for k in range(report.times.size):
        lines.append(
            f"{fnum(report.times[k])},{fnum(report.estimate[k])},"
            f"{fnum(report.truth[k])},{fnum(report.residual[k])}"
        )
    path.write_text("\n".join(lines) + "\n")


def attack_summary(report: AttackReport) -> dict:
    return {
        "target": report.target,
        "coalition": sorted(report.coalition),
        "v_known": report.v_known,
        "fitted_residual": report.fitted_constant,
        "max_wobble": report.max_wobble,
        "residual_is_constant": report.residual_is_constant,
    }


def write_compare_csv(
    path: Path,
    times: np.ndarray,
    err_conventional: np.ndarray,
    err_masked: np.ndarray,
    err_decomposed: np.ndarray,
) -> None:
    lines = ["t,err_conventional,err_masked,err_decomposed"]
    for k in range(times.size):
        lines.append(
            f"{fnum(times[k])},{fnum(err_conventional[k])},"
            f"{fnum(err_masked[k])},{fnum(err_decomposed[k])}"
        )
    path.write_text("\n".join(lines) + "\n")
