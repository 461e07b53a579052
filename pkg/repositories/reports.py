"""Filesystem repository for reports, tables, trajectories and manifests."""

import asyncio
import json
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from pydantic import BaseModel

from core.exceptions import ReportWriteError
from core.logging import get_logger
from domain.noise import BrownianPath
from domain.reports import RunManifest
from domain.trajectory import Trajectory
from repositories.interfaces import IReportRepository

logger = get_logger(__name__)

MANIFEST_NAME = "manifest.json"


class FileReportRepository(IReportRepository):
    """Writes every artifact of a run into one output directory."""

    def __init__(self, output_dir: str | Path) -> None:
        """Initialize repository with its output directory."""
        self.output_dir = Path(output_dir)

    def _target(self, filename: str) -> Path:
        try:
            self.output_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ReportWriteError(f"Cannot create output directory {self.output_dir}: {e}")
        return self.output_dir / filename

    async def _write(self, filename: str, writer: Any) -> Path:
        target = self._target(filename)
        try:
            await asyncio.to_thread(writer, target)
        except OSError as e:
            logger.error(f"Failed to write {target}: {str(e)}")
            raise ReportWriteError(f"Unable to write {target}: {str(e)}")
        logger.debug(f"Wrote {target}")
        return target

    async def save_report(self, name: str, report: BaseModel) -> Path:
        """JSON dump with field aliases, e.g. `pass` for inequality checks."""
        text = report.model_dump_json(by_alias=True, indent=2)
        return await self._write(f"{name}.json", lambda p: p.write_text(text + "\n", encoding="utf-8"))

    async def save_table(self, name: str, rows: list[dict[str, Any]]) -> Path:
        frame = pd.DataFrame(rows)
        return await self._write(f"{name}.csv", lambda p: frame.to_csv(p, index=False))

    async def save_trajectory(self, name: str, trajectory: Trajectory) -> Path:
        """Columns t, c_1..c_n, norm_h, norm_v at the stored times."""
        columns = {"t": trajectory.times}
        for j in range(trajectory.n_modes):
            columns[f"c_{j + 1}"] = trajectory.states[:, j]
        columns["norm_h"] = trajectory.norms_h
        columns["norm_v"] = trajectory.norms_v
        frame = pd.DataFrame(columns)
        return await self._write(f"{name}.csv", lambda p: frame.to_csv(p, index=False))

    async def save_path(self, name: str, path: BrownianPath) -> Path:
        """Long format (mode, k, t_k, beta_value) at the finest level, modes 1-based."""
        n_points = path.n_steps + 1
        times = path.grid_times(path.max_level)
        frame = pd.DataFrame(
            {
                "mode": np.repeat(np.arange(1, path.n_noise_modes + 1), n_points),
                "k": np.tile(np.arange(n_points), path.n_noise_modes),
                "t_k": np.tile(times, path.n_noise_modes),
                "beta_value": path.values.ravel(),
            }
        )
        return await self._write(f"{name}.csv", lambda p: frame.to_csv(p, index=False))

    async def save_manifest(self, manifest: RunManifest) -> Path:
        text = manifest.model_dump_json(indent=2)
        return await self._write(MANIFEST_NAME, lambda p: p.write_text(text + "\n", encoding="utf-8"))

    async def load_reports(self) -> dict[str, dict[str, Any]]:
        if not self.output_dir.is_dir():
            raise ReportWriteError(f"Report directory {self.output_dir} does not exist")

        def read() -> dict[str, dict[str, Any]]:
            reports = {}
            for file in sorted(self.output_dir.glob("*.json")):
                if file.name == MANIFEST_NAME:
                    continue
                try:
                    reports[file.stem] = json.loads(file.read_text(encoding="utf-8"))
                except (OSError, json.JSONDecodeError) as e:
                    logger.warning(f"Skipping unreadable report {file}: {str(e)}")
            return reports

        return await asyncio.to_thread(read)
