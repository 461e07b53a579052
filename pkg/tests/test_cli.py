import json

import pytest

from core.exceptions import ArgumentError, BlowUpError, ConfigurationError, QuotaBreachError
from domain.reports import ModulusReport, RunMetadata
from handlers.cli.handler import (
    EXIT_FAIL,
    EXIT_PASS,
    EXIT_QUOTA,
    EXIT_USAGE,
    error_exit_code,
    main,
    quota_breached,
    report_passed,
    verdict_exit_code,
)


def _run(command: str, config, out, *extra: str) -> int:
    return main([command, "--config", str(config), "--out", str(out), *extra])


def test_simulate_writes_requested_artifacts(small_gbm_config, tmp_path):
    out = tmp_path / "run"
    assert _run("simulate", small_gbm_config, out, "--emit-trajectory", "--emit-path") == EXIT_PASS
    for name in ("simulate.json", "trajectory_ito.csv", "trajectory_wz_m4.csv", "path.csv", "manifest.json"):
        assert (out / name).exists(), name
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["exit_code"] == EXIT_PASS
    assert manifest["command"] == "simulate"
    assert len(manifest["outputs"]) == 4


def test_simulate_is_reproducible(small_gbm_config, tmp_path):
    for run in ("a", "b"):
        assert _run("simulate", small_gbm_config, tmp_path / run, "--emit-trajectory", "--seed", "17") == EXIT_PASS
    first = (tmp_path / "a" / "trajectory_wz_m4.csv").read_bytes()
    second = (tmp_path / "b" / "trajectory_wz_m4.csv").read_bytes()
    assert first == second


def test_malformed_config_is_a_usage_error(write_config, tmp_path):
    config = write_config("[experiment]\nbogus = 1\n")
    assert _run("converge", config, tmp_path / "out") == EXIT_USAGE
    assert not (tmp_path / "out").exists()


def test_missing_config_flag():
    with pytest.raises(SystemExit) as info:
        main(["converge"])
    assert info.value.code == 2


def test_bad_override_is_a_usage_error(small_gbm_config, tmp_path):
    assert _run("converge", small_gbm_config, tmp_path, "--paths", "0") == EXIT_USAGE


def test_converge_writes_report_and_manifest(small_gbm_config, tmp_path):
    code = _run("converge", small_gbm_config, tmp_path)
    assert code in (EXIT_PASS, EXIT_FAIL)
    report = json.loads((tmp_path / "converge.json").read_text(encoding="utf-8"))
    assert report["reference"] == "oracle"
    assert (tmp_path / "converge.csv").exists()
    manifest = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["exit_code"] == code
    assert manifest["seed"] == 5


def test_refine_on_scalar_model_is_a_usage_error(small_gbm_config, tmp_path):
    assert _run("refine", small_gbm_config, tmp_path) == EXIT_USAGE
    manifest = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["exit_code"] == EXIT_USAGE


def test_identity_then_report(small_gbm_config, tmp_path, capsys):
    assert _run("identity", small_gbm_config, tmp_path) == EXIT_PASS
    assert main(["report", "--out", str(tmp_path)]) == EXIT_PASS
    printed = capsys.readouterr().out
    assert "identity" in printed
    assert (tmp_path / "summary.csv").exists()


def test_report_needs_reports(tmp_path):
    assert main(["report", "--out", str(tmp_path)]) == EXIT_USAGE
    assert main(["report", "--out", str(tmp_path / "absent")]) == EXIT_USAGE


def test_report_passed():
    assert report_passed({"verdict": {"passed": False}, "passed": True}) is False
    assert report_passed({"passed": True}) is True
    assert report_passed({"checks": [{"pass": True}, {"pass": False}]}) is False
    assert report_passed({"nonincreasing": True}) is True
    assert report_passed({"reports": [{"passed": True}, {"verdict": {"passed": True}}]}) is True
    assert report_passed({"m": 3}) is None


def test_quota_verdict():
    report = ModulusReport(
        metadata=RunMetadata(experiment="modulus", model="gbm", seed=0),
        m_levels=[3, 4],
        n_paths=10,
        n_blowups=5,
        quota_ok=False,
        threshold_slope=-0.5,
        variants=[],
        passed=False,
    )
    assert quota_breached(report)
    assert verdict_exit_code(report) == EXIT_QUOTA
    assert verdict_exit_code(report.model_copy(update={"quota_ok": True, "passed": True})) == EXIT_PASS


def test_error_exit_codes():
    assert error_exit_code(ConfigurationError("x")) == EXIT_USAGE
    assert error_exit_code(ArgumentError("x")) == EXIT_USAGE
    assert error_exit_code(QuotaBreachError("x")) == EXIT_QUOTA
    assert error_exit_code(BlowUpError("x", last_valid_time=0.5)) == EXIT_FAIL


@pytest.mark.parametrize("command", ["converge", "identity"])
def test_misspelled_model_parameter_is_a_usage_error(write_config, small_gbm_text, tmp_path, command):
    config = write_config(small_gbm_text.replace("mu = 0.1", "muu = 0.3"))
    assert _run(command, config, tmp_path / "out") == EXIT_USAGE
    assert not (tmp_path / "out").exists()
