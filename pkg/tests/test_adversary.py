import dataclasses
import math

import numpy as np
import pytest

from dacsim import (
    EngineConfig,
    MaskVector,
    SignalBank,
    SinusoidSpec,
    Transcript,
    build_coalition_view,
    build_eavesdropper_view,
    build_graph,
    coalition_infer,
    coalition_split_mask,
    eavesdrop_reconstruct,
    eavesdrop_report,
    edge_draw_shift_experiment,
    evaluate,
    load_exchange,
    mask_bank,
    reference_shift_experiment,
    simulate_conventional,
    simulate_masked,
)
from dacsim.adversary import EavesdropperView, _coalition_estimate
from dacsim.errors import (
    NeighborInCoalitionError,
    NonUniformSamplingError,
    NotAnEdgeError,
    NotZeroSumError,
    TargetInCoalitionError,
)
from dacsim.golden import GOLDEN_MASKS, golden_bank, golden_exchange, golden_graph, golden_masked

RING6 = build_graph("ring", 6)

# Fine sampling for reconstruction-accuracy checks; the trapezoid error on
# the fast initial transient scales with (beta * lambda_max * step)^2.
ATTACK_CFG = EngineConfig(beta=300.0, dt=1e-5, t_final=2.5, record_every=1)
# Coarser config is plenty for bitwise-equality experiments.
PAIR_CFG = EngineConfig(beta=300.0, dt=1e-4, t_final=2.0, record_every=10)


@pytest.fixture(scope="module")
def masked_attack_run():
    return simulate_masked(golden_graph(), golden_masked(), ATTACK_CFG)


@pytest.fixture(scope="module")
def conventional_attack_run():
    return simulate_conventional(golden_graph(), golden_bank(), ATTACK_CFG)


# --- information hygiene ---


def test_eavesdropper_view_holds_only_public_data():
    names = {f.name for f in dataclasses.fields(EavesdropperView)}
    assert names == {"graph", "beta", "transcript"}


def test_coalition_view_restricts_draws(masked_attack_run):
    view = build_coalition_view(
        RING6, 300.0, masked_attack_run.transcript, golden_bank(), golden_exchange(), {2}
    )
    touched = {edge for edge in view.incident_draws}
    assert touched == {(1, 2), (2, 1), (2, 3), (3, 2)}
    assert set(view.own_signals) == {2}


# --- eavesdropper reconstruction ---


def test_nonuniform_sampling_rejected():
    times = np.array([0.0, 0.1, 0.3])
    states = np.zeros((3, 6))
    view = build_eavesdropper_view(RING6, 300.0, Transcript(times=times, states=states))
    with pytest.raises(NonUniformSamplingError):
        eavesdrop_reconstruct(view)


def test_eavesdropper_recovers_masked_reference(masked_attack_run):
    view = build_eavesdropper_view(RING6, 300.0, masked_attack_run.transcript)
    estimate = eavesdrop_reconstruct(view)
    masked_truth = evaluate(golden_masked().folded, masked_attack_run.transcript.times)
    assert np.abs(estimate - masked_truth).max() < 1e-3


def test_eavesdropper_residual_is_each_agents_mask(masked_attack_run):
    view = build_eavesdropper_view(RING6, 300.0, masked_attack_run.transcript)
    reports = eavesdrop_report(view, golden_bank())
    for report, mask in zip(reports, GOLDEN_MASKS):
        assert report.residual_is_constant
        assert report.max_wobble < 5e-3
        assert abs(report.fitted_constant - mask) < 1e-3


def test_eavesdropper_breaks_unmasked_run(conventional_attack_run):
    view = build_eavesdropper_view(RING6, 300.0, conventional_attack_run.transcript)
    estimate = eavesdrop_reconstruct(view)
    truth = evaluate(golden_bank(), conventional_attack_run.transcript.times)
    assert np.abs(estimate - truth).max() < 1e-3


def test_masked_minus_unmasked_reconstruction_equals_masks(
    masked_attack_run, conventional_attack_run
):
    masked_est = eavesdrop_reconstruct(
        build_eavesdropper_view(RING6, 300.0, masked_attack_run.transcript)
    )
    plain_est = eavesdrop_reconstruct(
        build_eavesdropper_view(RING6, 300.0, conventional_attack_run.transcript)
    )
    deviation = masked_est - plain_est - GOLDEN_MASKS
    assert np.abs(deviation).max() < 2e-3


def test_reconstruction_error_quarters_when_sampling_halves(masked_attack_run):
    transcript = masked_attack_run.transcript
    masked_truth = evaluate(golden_masked().folded, transcript.times)

    def max_error(stride: int) -> float:
        sub = Transcript(times=transcript.times[::stride], states=transcript.states[::stride])
        estimate = eavesdrop_reconstruct(build_eavesdropper_view(RING6, 300.0, sub))
        return float(np.abs(estimate - masked_truth[::stride]).max())

    assert max_error(2) / max_error(1) >= 3.5


def test_zero_scenario_reconstructs_zero():
    bank = SignalBank(signals=(SinusoidSpec("sin", 0.0, 1.0, 0.0),) * 6)
    masked = mask_bank(bank, MaskVector.zeros(6))
    cfg = EngineConfig(beta=300.0, dt=1e-4, t_final=0.5, record_every=1)
    result = simulate_masked(RING6, masked, cfg)
    estimate = eavesdrop_reconstruct(build_eavesdropper_view(RING6, 300.0, result.transcript))
    assert np.abs(estimate).max() < 1e-6


# --- coalition attack ---


def test_split_mask_golden_instance(masked_attack_run):
    view = build_coalition_view(
        RING6, 300.0, masked_attack_run.transcript, golden_bank(), golden_exchange(), {2}
    )
    v_known, unknown = coalition_split_mask(view, 1)
    assert abs(v_known - 6.55) < 1e-12
    assert unknown == [(1, 6)]


def test_split_mask_full_coverage(masked_attack_run):
    view = build_coalition_view(
        RING6, 300.0, masked_attack_run.transcript, golden_bank(), golden_exchange(), {2, 6}
    )
    _v, unknown = coalition_split_mask(view, 1)
    assert unknown == []


def test_split_mask_disjoint_coalition(masked_attack_run):
    view = build_coalition_view(
        RING6, 300.0, masked_attack_run.transcript, golden_bank(), golden_exchange(), {4}
    )
    v_known, unknown = coalition_split_mask(view, 1)
    assert v_known == 0.0
    assert unknown == [(1, 2), (1, 6)]


def test_split_mask_rejects_target_in_coalition(masked_attack_run):
    view = build_coalition_view(
        RING6, 300.0, masked_attack_run.transcript, golden_bank(), golden_exchange(), {2}
    )
    with pytest.raises(TargetInCoalitionError):
        coalition_split_mask(view, 2)


def test_coalition_residual_is_unknown_mask_part(masked_attack_run):
    view = build_coalition_view(
        RING6, 300.0, masked_attack_run.transcript, golden_bank(), golden_exchange(), {2}
    )
    report = coalition_infer(view, 1, golden_bank())
    # Unknown part of agent 1's mask: 7.90 - (-0.40) = 8.30.
    assert report.residual_is_constant
    assert abs(report.fitted_constant - 8.30) < 1e-3
    assert abs(report.v_known - 6.55) < 1e-12


def test_full_neighborhood_coalition_recovers_exactly(masked_attack_run):
    view = build_coalition_view(
        RING6, 300.0, masked_attack_run.transcript, golden_bank(), golden_exchange(), {2, 6}
    )
    report = coalition_infer(view, 1, golden_bank())
    assert np.abs(report.estimate - report.truth).max() < 2e-3


def test_zero_masks_leave_nothing_hidden():
    bank = golden_bank()
    masked = mask_bank(bank, MaskVector.zeros(6))
    result = simulate_masked(RING6, masked, ATTACK_CFG)
    view = build_coalition_view(
        RING6, 300.0, result.transcript, bank, load_exchange(RING6, np.zeros((6, 6))), {2}
    )
    report = coalition_infer(view, 1, bank)
    assert abs(report.fitted_constant) < 1e-3


# --- zero-sum shift indistinguishability ---


def test_shift_experiment_examples(golden):
    for s in (
        np.array([1.0, -1.0, 0.0, 0.0, 0.0, 0.0]),
        5.0 * (np.eye(6)[2] - np.eye(6)[4]),
    ):
        outcome = reference_shift_experiment(
            golden["graph"], golden["bank"], golden["exchange"], s, PAIR_CFG
        )
        assert outcome.transcripts_equal


def test_shift_experiment_rejects_nonzero_sum(golden):
    with pytest.raises(NotZeroSumError):
        reference_shift_experiment(
            golden["graph"],
            golden["bank"],
            golden["exchange"],
            np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            PAIR_CFG,
        )


def test_shift_experiment_random_suite(golden, rng):
    for _ in range(10):
        s = rng.uniform(-3.0, 3.0, 6)
        s[-1] = -math.fsum(s[:-1].tolist())
        outcome = reference_shift_experiment(
            golden["graph"], golden["bank"], golden["exchange"], s, PAIR_CFG
        )
        assert outcome.transcripts_equal
        # The shifted masks stay zero-sum at the exact level.
        assert abs(float(sum(outcome.masks_b.exact))) < 1e-12


# --- single-edge draw shift indistinguishability ---


def test_edge_shift_bundled_instance(golden):
    outcome = edge_draw_shift_experiment(
        golden["graph"], golden["bank"], golden["exchange"], 1, 6, 5.0, {2}, PAIR_CFG
    )
    assert outcome.transcripts_equal
    assert outcome.estimates_equal
    assert outcome.reference_delta_at_target == 5.0
    # Mask oracle: only the two endpoints move, by -r and +r exactly.
    masks_delta = [b - a for a, b in zip(outcome.masks_a.exact, outcome.masks_b.exact)]
    assert [float(d) for d in masks_delta] == [-5.0, 0.0, 0.0, 0.0, 0.0, 5.0]


def test_edge_shift_r_zero_is_trivially_identical(golden):
    outcome = edge_draw_shift_experiment(
        golden["graph"], golden["bank"], golden["exchange"], 1, 6, 0.0, {2}, PAIR_CFG
    )
    assert outcome.transcripts_equal
    assert np.array_equal(outcome.masks_a.values, outcome.masks_b.values)


def test_edge_shift_validation(golden):
    g, bank, ex = golden["graph"], golden["bank"], golden["exchange"]
    with pytest.raises(NeighborInCoalitionError):
        edge_draw_shift_experiment(g, bank, ex, 1, 2, 1.0, {2}, PAIR_CFG)
    with pytest.raises(NotAnEdgeError):
        edge_draw_shift_experiment(g, bank, ex, 1, 3, 1.0, {2}, PAIR_CFG)
    with pytest.raises(TargetInCoalitionError):
        edge_draw_shift_experiment(g, bank, ex, 2, 3, 1.0, {2}, PAIR_CFG)


def test_edge_shift_random_tuples(golden, rng):
    g = golden["graph"]
    for _ in range(8):
        target = int(rng.integers(1, 7))
        nbrs = g.neighbors(target)
        legit = int(nbrs[int(rng.integers(0, len(nbrs)))])
        coalition = {j for j in nbrs if j != legit}
        r = float(rng.uniform(-10.0, 10.0))
        outcome = edge_draw_shift_experiment(
            g, golden["bank"], golden["exchange"], target, legit, r, coalition, PAIR_CFG
        )
        assert outcome.transcripts_equal
        assert outcome.estimates_equal
        assert outcome.reference_delta_at_target == r


def test_coalition_estimate_uses_view_only(masked_attack_run):
    # The estimate path must be computable from the view alone.
    view = build_coalition_view(
        RING6, 300.0, masked_attack_run.transcript, golden_bank(), golden_exchange(), {2}
    )
    estimate = _coalition_estimate(view, 1)
    assert estimate.shape == masked_attack_run.transcript.times.shape
