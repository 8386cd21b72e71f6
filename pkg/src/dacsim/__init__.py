"""Deterministic simulator and adversary lab for masked dynamic average consensus."""

from .adversary import (
    AttackReport,
    CoalitionView,
    EavesdropperView,
    build_coalition_view,
    build_eavesdropper_view,
    coalition_infer,
    coalition_split_mask,
    eavesdrop_reconstruct,
    eavesdrop_report,
    edge_draw_shift_experiment,
    reference_shift_experiment,
)
from .baseline import DecomposedGraph, build_decomposed, simulate_decomposed
from .engine import (
    EngineConfig,
    RunResult,
    Transcript,
    estimate_decay_rate,
    estimate_rk4_order,
    fit_decay_rate,
    simulate_conventional,
    simulate_masked,
    sum_preservation,
)
from .errors import DacsimError
from .experiment import (
    ExperimentConfig,
    build_scenario,
    compare_convergence,
    golden_config,
    load_config,
    run_scenario,
    verify_theorems,
)
from .masking import (
    ExchangeMatrix,
    MaskVector,
    MaskedBank,
    compute_masks,
    draw_exchange,
    load_exchange,
    mask_bank,
    remask,
)
from .signals import (
    SignalBank,
    SinusoidSpec,
    common_period,
    compute_gamma,
    evaluate,
    evaluate_derivative,
    shift_offsets,
)
from .topology import Graph, Spectrum, build_graph, neighbors, random_connected_graph, spectrum

__version__ = "0.1.0"

__all__ = [
    "AttackReport",
    "CoalitionView",
    "DacsimError",
    "DecomposedGraph",
    "EavesdropperView",
    "EngineConfig",
    "ExchangeMatrix",
    "ExperimentConfig",
    "Graph",
    "MaskVector",
    "MaskedBank",
    "RunResult",
    "SignalBank",
    "SinusoidSpec",
    "Spectrum",
    "Transcript",
    "build_coalition_view",
    "build_decomposed",
    "build_eavesdropper_view",
    "build_graph",
    "build_scenario",
    "coalition_infer",
    "coalition_split_mask",
    "common_period",
    "compare_convergence",
    "compute_gamma",
    "compute_masks",
    "draw_exchange",
    "eavesdrop_reconstruct",
    "eavesdrop_report",
    "edge_draw_shift_experiment",
    "estimate_decay_rate",
    "estimate_rk4_order",
    "evaluate",
    "evaluate_derivative",
    "fit_decay_rate",
    "golden_config",
    "load_config",
    "load_exchange",
    "mask_bank",
    "neighbors",
    "random_connected_graph",
    "reference_shift_experiment",
    "remask",
    "run_scenario",
    "shift_offsets",
    "simulate_conventional",
    "simulate_decomposed",
    "simulate_masked",
    "spectrum",
    "sum_preservation",
    "verify_theorems",
]
