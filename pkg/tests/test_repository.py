import asyncio
import json

import numpy as np
import pandas as pd
import pytest

from core.exceptions import ReportWriteError
from domain.noise import sample_path
from domain.reports import HypothesisReport, InequalityCheck, RunManifest, RunMetadata
from domain.trajectory import Trajectory
from repositories.reports import MANIFEST_NAME, FileReportRepository


@pytest.fixture
def repository(tmp_path) -> FileReportRepository:
    return FileReportRepository(tmp_path / "out")


def _hypothesis_report() -> HypothesisReport:
    return HypothesisReport(
        metadata=RunMetadata(experiment="probe", model="heat", seed=1),
        n_trials=10,
        r_max=5.0,
        tolerance=1e-8,
        checks=[InequalityCheck(name="coercivity", worst_margin=-0.5, passed=True)],
    )


def test_report_json_uses_pass_alias(repository):
    target = asyncio.run(repository.save_report("probe", _hypothesis_report()))
    data = json.loads(target.read_text(encoding="utf-8"))
    assert data["checks"][0]["pass"] is True
    assert "passed" not in data["checks"][0]


def test_table_csv(repository):
    target = asyncio.run(repository.save_table("probe", _hypothesis_report().table_rows()))
    frame = pd.read_csv(target)
    assert list(frame.columns) == ["name", "worst_margin", "pass", "non_finite"]
    assert len(frame) == 1


def test_trajectory_csv(repository):
    times = np.linspace(0.0, 1.0, 5)
    states = np.column_stack([times, 2.0 * times])
    traj = Trajectory(times=times, states=states, norms_h=times, norms_v=times)
    frame = pd.read_csv(asyncio.run(repository.save_trajectory("trajectory_ito", traj)))
    assert list(frame.columns) == ["t", "c_1", "c_2", "norm_h", "norm_v"]
    assert len(frame) == 5
    assert frame["c_2"].iloc[-1] == pytest.approx(2.0)


def test_path_csv(repository):
    path = sample_path(seed=4, T=1.0, max_level=3, n_noise_modes=2)
    frame = pd.read_csv(asyncio.run(repository.save_path("path", path)))
    assert list(frame.columns) == ["mode", "k", "t_k", "beta_value"]
    assert len(frame) == 2 * 9
    first_mode = frame[frame["mode"] == 1]
    assert np.allclose(first_mode["beta_value"], path.values[0])
    assert first_mode["t_k"].iloc[-1] == pytest.approx(1.0)


def test_manifest_is_skipped_when_loading(repository):
    manifest = RunManifest(
        command="probe", config_path="x.toml", config_hash="abc", seed=1,
        threads=1, version="1.0.0", started_at="2026-01-01T00:00:00+00:00",
    )
    asyncio.run(repository.save_manifest(manifest))
    asyncio.run(repository.save_report("probe", _hypothesis_report()))
    assert (repository.output_dir / MANIFEST_NAME).exists()
    assert list(asyncio.run(repository.load_reports())) == ["probe"]


def test_loading_a_missing_directory(tmp_path):
    with pytest.raises(ReportWriteError):
        asyncio.run(FileReportRepository(tmp_path / "absent").load_reports())


def test_unwritable_target(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(ReportWriteError):
        asyncio.run(FileReportRepository(blocker / "nested").save_table("t", [{"a": 1}]))
