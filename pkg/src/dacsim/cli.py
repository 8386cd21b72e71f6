"""Command-line entry point.

Subcommands: ``run``, ``verify``, ``attack``, ``compare``, ``masks``. Every
failure path emits a machine-readable JSON error object. Exit codes: 0 ok,
2 configuration/validation error, 3 numeric failure, 4 verification-check
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from .errors import (
    ConfigError,
    DacsimError,
    InsufficientTransientError,
    NonFiniteStateError,
    NonUniformSamplingError,
    StabilityGuardError,
)
from .experiment import (
    CHECK_IDS,
    EtaConfig,
    ExperimentConfig,
    compare_convergence,
    load_config,
    masks_for_config,
    run_scenario,
    verify_theorems,
)
from .persist import write_json

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_CHECK_FAILED = 4

_NUMERIC_ERRORS = (
    StabilityGuardError,
    NonFiniteStateError,
    InsufficientTransientError,
    NonUniformSamplingError,
)


def _emit_error(exc: BaseException) -> int:
    payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    if isinstance(exc, _NUMERIC_ERRORS):
        return EXIT_NUMERIC
    if isinstance(exc, DacsimError):
        return EXIT_CONFIG
    return EXIT_NUMERIC


def _resolve_out(arg_out: str | None, config_out: str | None) -> Path:
    out = Path(arg_out or config_out or "dacsim-out")
    root = os.environ.get("DACSIM_OUT")
    if root and not out.is_absolute():
        out = Path(root) / out
    return out


def _load(args) -> ExperimentConfig:
    config = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        config = replace(config, seed=args.seed)
    if getattr(args, "eta", None) is not None:
        config = replace(
            config, eta=EtaConfig(source="file", path=str(Path(args.eta).resolve()))
        )
    return config


def _cmd_run(args) -> int:
    config = _load(args)
    artifacts = run_scenario(config, _resolve_out(args.out, config.output_dir))
    print(json.dumps({"artifacts": {k: str(v) for k, v in artifacts.items()}}, sort_keys=True))
    return EXIT_OK


def _cmd_attack(args) -> int:
    config = _load(args)
    if config.adversary.mode == "none":
        raise ConfigError("attack requires an adversary block with mode != 'none'")
    artifacts = run_scenario(config, _resolve_out(args.out, config.output_dir))
    print(json.dumps({"artifacts": {k: str(v) for k, v in artifacts.items()}}, sort_keys=True))
    return EXIT_OK


def _cmd_verify(args) -> int:
    config = _load(args)
    checks = [c.strip() for c in args.checks.split(",")] if args.checks else None
    report = verify_theorems(config, checks)
    if args.out:
        out = _resolve_out(args.out, config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "verify.json", report)
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK if report["all_passed"] else EXIT_CHECK_FAILED


def _cmd_compare(args) -> int:
    config = _load(args)
    artifacts = compare_convergence(config, _resolve_out(args.out, config.output_dir))
    print(json.dumps({"artifacts": {k: str(v) for k, v in artifacts.items()}}, sort_keys=True))
    return EXIT_OK


def _cmd_masks(args) -> int:
    config = _load(args)
    _graph, masks = masks_for_config(config)
    values = [float(v) for v in masks.values]
    if args.format == "json":
        print(json.dumps({"masks": values}, sort_keys=True))
    else:
        print("agent_id,mask")
        for i, v in enumerate(values, start=1):
            print(f"{i},{v!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dacsim",
        description="Deterministic simulator and adversary laboratory for "
        "masked dynamic average consensus.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_format=False):
        p.add_argument("--config", required=True, help="experiment config JSON file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--eta", default=None, help="JSON file with an explicit exchange matrix")
        if with_format:
            p.add_argument("--format", choices=("csv", "json"), default="csv")

    p_run = sub.add_parser("run", help="simulate the masked protocol and persist artifacts")
    common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_verify = sub.add_parser("verify", help="run the verification suites")
    common(p_verify)
    p_verify.add_argument(
        "--checks",
        default=None,
        help=f"comma-separated subset of {','.join(CHECK_IDS)} (default: all)",
    )
    p_verify.set_defaults(func=_cmd_verify)

    p_attack = sub.add_parser("attack", help="run the configured adversary against a run")
    common(p_attack)
    p_attack.set_defaults(func=_cmd_attack)

    p_compare = sub.add_parser("compare", help="conventional vs masked vs decomposed baseline")
    common(p_compare)
    p_compare.set_defaults(func=_cmd_compare)

    p_masks = sub.add_parser("masks", help="print the mask vector for a config/exchange file")
    common(p_masks, with_format=True)
    p_masks.set_defaults(func=_cmd_masks)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DacsimError as exc:
        return _emit_error(exc)
    except Exception as exc:  # noqa: BLE001 - contract: never a bare crash
        return _emit_error(exc)


if __name__ == "__main__":
    raise SystemExit(main())
