import dataclasses
import hashlib
import json
import subprocess
import sys
from importlib import resources

import numpy as np
import pytest

from dacsim import load_config
from dacsim.cli import main
from dacsim.errors import ConfigError, StabilityGuardError
from dacsim.experiment import (
    ExperimentConfig,
    build_scenario,
    compare_convergence,
    golden_config,
    run_scenario,
    verify_theorems,
)
from dacsim.golden import GOLDEN_MASKS


def quick_config(**overrides) -> ExperimentConfig:
    cfg = golden_config()
    defaults = {"t_final": 2.0}
    defaults.update(overrides)
    return dataclasses.replace(cfg, **defaults)


def write_config(path, config: ExperimentConfig):
    path.write_text(json.dumps(config.to_dict(), indent=2))
    return str(path)


# --- config parsing and validation ---


def test_golden_config_builds():
    scenario = build_scenario(golden_config())
    assert scenario.graph.n == 6
    assert np.abs(scenario.masks.values - GOLDEN_MASKS).max() < 1e-12


def test_signal_count_mismatch_rejected():
    cfg = golden_config()
    bad = dataclasses.replace(cfg, signals=cfg.signals[:5])
    with pytest.raises(ConfigError):
        build_scenario(bad)


def test_unknown_key_rejected():
    raw = golden_config().to_dict()
    raw["surprise"] = 1
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(raw)


def test_stability_guard_from_config():
    bad = quick_config(dt=0.01)
    with pytest.raises(StabilityGuardError):
        build_scenario(bad)


def test_coalition_validation():
    with pytest.raises(ConfigError):
        build_scenario(
            quick_config(
                adversary=dataclasses.replace(
                    golden_config().adversary, mode="coalition", coalition=(2,), target=2
                )
            )
        )
    with pytest.raises(ConfigError):
        build_scenario(
            quick_config(
                adversary=dataclasses.replace(
                    golden_config().adversary, mode="coalition", coalition=(9,), target=1
                )
            )
        )


def test_mask_override_length_checked():
    with pytest.raises(ConfigError):
        build_scenario(quick_config(mask_override=(1.0, 2.0)))


# --- run artifacts ---


def test_run_scenario_writes_artifacts(tmp_path):
    cfg = quick_config(t_final=0.5)
    artifacts = run_scenario(cfg, tmp_path / "out")
    for key in ("run_csv", "run_json", "masks_json", "config_json"):
        assert artifacts[key].exists()
    header = artifacts["run_csv"].read_text().splitlines()[0]
    assert header == "t,agent_id,xhat,x_true_ref,x_masked_ref,x_avg_true"
    sidecar = json.loads(artifacts["run_json"].read_text())
    assert set(sidecar) == {"beta", "dt", "lambda2", "gamma", "bound", "fitted_rate"}
    masks = json.loads(artifacts["masks_json"].read_text())
    assert masks["exact_sum_is_zero"] is True


def test_run_scenario_byte_identical_across_repeats(tmp_path):
    cfg = dataclasses.replace(
        quick_config(t_final=0.5, seed=77),
        eta=dataclasses.replace(golden_config().eta, source="random", matrix=None),
    )
    a = run_scenario(cfg, tmp_path / "a")
    b = run_scenario(cfg, tmp_path / "b")
    for key in a:
        assert a[key].read_bytes() == b[key].read_bytes(), key


def test_attack_artifacts_eavesdropper(tmp_path):
    cfg = quick_config(
        dt=1e-5,
        t_final=1.5,
        record_every=1,
        adversary=dataclasses.replace(golden_config().adversary, mode="eavesdropper"),
    )
    artifacts = run_scenario(cfg, tmp_path / "out")
    report = json.loads(artifacts["attack_json"].read_text())
    assert len(report["reports"]) == 6
    fitted = [r["fitted_residual"] for r in report["reports"]]
    assert np.abs(np.array(fitted) - GOLDEN_MASKS).max() < 1e-3


def test_attack_artifacts_coalition(tmp_path):
    cfg = quick_config(
        dt=1e-5,
        t_final=1.5,
        record_every=1,
        adversary=dataclasses.replace(
            golden_config().adversary, mode="coalition", coalition=(2,), target=1
        ),
    )
    artifacts = run_scenario(cfg, tmp_path / "out")
    report = json.loads(artifacts["attack_json"].read_text())["reports"][0]
    assert abs(report["fitted_residual"] - 8.30) < 1e-3
    assert report["v_known"] == pytest.approx(6.55, abs=1e-12)
    assert report["residual_is_constant"] is True


# --- verification suites ---


def test_verify_all_checks_pass_on_golden_quick():
    report = verify_theorems(quick_config(), shift_samples=3, edge_samples=2)
    assert report["all_passed"], report
    for check, entry in report["checks"].items():
        assert entry.get("passed") in (True, None), (check, entry)


def test_verify_corrupted_mask_fails_thm1_and_skips_rest():
    cfg = quick_config(mask_override=(1.0, 0.0, 0.0, 0.0, 0.0, 0.0))
    report = verify_theorems(cfg)
    assert report["checks"]["thm1"]["passed"] is False
    for check in ("thm2", "thm3", "corollary", "lemma1", "remark2"):
        assert report["checks"][check] == {"skipped": True}
    assert report["all_passed"] is False


def test_verify_full_neighbor_coalition_marks_thm3_not_applicable():
    cfg = quick_config(
        adversary=dataclasses.replace(
            golden_config().adversary, mode="coalition", coalition=(2, 6), target=1
        )
    )
    report = verify_theorems(cfg, checks=["thm3", "corollary"])
    assert report["checks"]["thm3"]["passed"] is None
    assert report["checks"]["thm3"]["applicable"] is False
    assert report["checks"]["corollary"]["passed"] is True
    assert report["all_passed"] is True


def test_verify_rejects_unknown_check():
    with pytest.raises(ConfigError):
        verify_theorems(quick_config(), checks=["thm9"])


# --- compare ---


def test_compare_requires_baseline(tmp_path):
    cfg = dataclasses.replace(
        quick_config(), baseline=dataclasses.replace(golden_config().baseline, enabled=False)
    )
    with pytest.raises(ConfigError):
        compare_convergence(cfg, tmp_path)


def test_compare_gamma_free_bank_all_converge(tmp_path):
    # One shared waveform with distinct offsets: zero disturbance, so the
    # conventional and masked errors decay to the integration floor.
    specs = tuple(
        {"kind": "sin", "amplitude": 3.0, "omega": 1.0, "phase": 0.5, "offset": o}
        for o in (3.0, 1.0, -2.0, 0.5, -1.0, -1.5)
    )
    raw = quick_config(t_final=1.0).to_dict()
    raw["signals"] = list(specs)
    cfg = ExperimentConfig.from_dict(raw)
    artifacts = compare_convergence(cfg, tmp_path / "cmp")
    rows = np.loadtxt(artifacts["compare_csv"], delimiter=",", skiprows=1)
    final = rows[-1]
    assert final[1] < 1e-6 and final[2] < 1e-6  # conventional, masked
    assert final[3] < 0.5  # decomposed converged past the threshold too


def test_compare_summary_ordering(tmp_path):
    artifacts = compare_convergence(quick_config(t_final=1.0), tmp_path / "cmp")
    summary = json.loads(artifacts["compare_json"].read_text())
    assert summary["lambda2_decomposed"] < summary["lambda2_base"]
    assert summary["rate_decomposed"] < summary["rate_masked"]
    rel = abs(summary["rate_masked"] - summary["rate_conventional"]) / summary["rate_conventional"]
    assert rel < 0.05
    assert summary["time_to_threshold"]["decomposed"] > summary["time_to_threshold"]["masked"]
    header = artifacts["compare_csv"].read_text().splitlines()[0]
    assert header == "t,err_conventional,err_masked,err_decomposed"


# --- CLI ---


def test_cli_masks_json(tmp_path, capsys):
    path = write_config(tmp_path / "cfg.json", quick_config())
    assert main(["masks", "--config", path, "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert np.abs(np.array(out["masks"]) - GOLDEN_MASKS).max() < 1e-12


def test_cli_masks_csv(tmp_path, capsys):
    path = write_config(tmp_path / "cfg.json", quick_config())
    assert main(["masks", "--config", path]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "agent_id,mask"
    assert len(lines) == 7


def test_cli_run_and_artifacts(tmp_path, capsys):
    path = write_config(tmp_path / "cfg.json", quick_config(t_final=0.5))
    code = main(["run", "--config", path, "--out", str(tmp_path / "out")])
    assert code == 0
    listing = json.loads(capsys.readouterr().out)["artifacts"]
    assert (tmp_path / "out" / "run.csv").exists()
    assert "run_csv" in listing


def test_cli_missing_config_is_structured_error(tmp_path, capsys):
    code = main(["run", "--config", str(tmp_path / "absent.json")])
    assert code == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["type"] == "ConfigError"


def test_cli_stability_guard_exit_code(tmp_path, capsys):
    path = write_config(tmp_path / "cfg.json", quick_config(dt=0.01))
    code = main(["run", "--config", path, "--out", str(tmp_path / "out")])
    assert code == 3
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["type"] == "StabilityGuardError"


def test_cli_attack_requires_adversary(tmp_path, capsys):
    path = write_config(tmp_path / "cfg.json", quick_config())
    code = main(["attack", "--config", path, "--out", str(tmp_path / "out")])
    assert code == 2


def test_cli_verify_failure_exit_code(tmp_path, capsys):
    cfg = quick_config(mask_override=(1.0, 0.0, 0.0, 0.0, 0.0, 0.0))
    path = write_config(tmp_path / "cfg.json", cfg)
    code = main(["verify", "--config", path, "--checks", "thm1"])
    assert code == 4
    report = json.loads(capsys.readouterr().out)
    assert report["checks"]["thm1"]["passed"] is False


def test_cli_verify_pass_exit_code(tmp_path, capsys):
    path = write_config(tmp_path / "cfg.json", quick_config())
    code = main(["verify", "--config", path, "--checks", "thm1,lemma1"])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["all_passed"] is True


def test_cli_verify_unknown_check(tmp_path, capsys):
    path = write_config(tmp_path / "cfg.json", quick_config())
    assert main(["verify", "--config", path, "--checks", "nope"]) == 2


def test_cli_compare_without_baseline(tmp_path, capsys):
    cfg = dataclasses.replace(
        quick_config(), baseline=dataclasses.replace(golden_config().baseline, enabled=False)
    )
    path = write_config(tmp_path / "cfg.json", cfg)
    assert main(["compare", "--config", path, "--out", str(tmp_path / "out")]) == 2


def test_cli_eta_override(tmp_path, capsys):
    # Zero exchange via --eta zeroes out the masks.
    eta_path = tmp_path / "zero_eta.json"
    eta_path.write_text(json.dumps({"matrix": [[0.0] * 6 for _ in range(6)]}))
    path = write_config(tmp_path / "cfg.json", quick_config())
    assert main(["masks", "--config", path, "--eta", str(eta_path), "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["masks"] == [0.0] * 6


def test_cli_seed_override_changes_random_masks(tmp_path, capsys):
    cfg = dataclasses.replace(
        quick_config(), eta=dataclasses.replace(golden_config().eta, source="random", matrix=None)
    )
    path = write_config(tmp_path / "cfg.json", cfg)
    outputs = []
    for seed in ("1", "2"):
        assert main(["masks", "--config", path, "--seed", seed, "--format", "json"]) == 0
        outputs.append(capsys.readouterr().out)
    assert outputs[0] != outputs[1]


def test_dacsim_out_env_root(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("DACSIM_OUT", str(tmp_path / "root"))
    path = write_config(tmp_path / "cfg.json", quick_config(t_final=0.5))
    assert main(["run", "--config", path, "--out", "rel"]) == 0
    capsys.readouterr()
    assert (tmp_path / "root" / "rel" / "run.csv").exists()


def test_config_file_roundtrip(tmp_path):
    path = write_config(tmp_path / "cfg.json", quick_config())
    loaded = load_config(path)
    assert loaded.beta == 300.0
    assert loaded.t_final == 2.0
    assert len(loaded.signals) == 6


def test_cli_verify_writes_report_artifact(tmp_path, capsys):
    path = write_config(tmp_path / "cfg.json", quick_config())
    assert main(["verify", "--config", path, "--checks", "thm1", "--out", str(tmp_path / "v")]) == 0
    report = json.loads((tmp_path / "v" / "verify.json").read_text())
    assert report["all_passed"] is True


# Guards against silent edits of the bundled golden fixture.
GOLDEN_CONFIG_SHA256 = "ab2a698abbf1b13da09e867365e3be70b0be5bff213bff43478b8621cb54c01f"


def test_bundled_golden_config_hash_pinned():
    raw = resources.files("dacsim.data").joinpath("golden.json").read_bytes()
    assert hashlib.sha256(raw).hexdigest() == GOLDEN_CONFIG_SHA256


def test_cli_module_invocation_subprocess(tmp_path):
    path = write_config(tmp_path / "cfg.json", quick_config())
    proc = subprocess.run(
        [sys.executable, "-m", "dacsim.cli", "masks", "--config", path, "--format", "json"],
        capture_output=True,
        text=True,
        timeout=300,
    )
    assert proc.returncode == 0
    out = json.loads(proc.stdout)
    assert np.abs(np.array(out["masks"]) - GOLDEN_MASKS).max() < 1e-12
