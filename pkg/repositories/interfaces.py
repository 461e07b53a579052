from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any

from pydantic import BaseModel

from domain.noise import BrownianPath
from domain.reports import RunManifest
from domain.trajectory import Trajectory


class IReportRepository(ABC):
    @abstractmethod
    async def save_report(self, name: str, report: BaseModel) -> Path:
        """Write a full report as JSON."""
        pass

    @abstractmethod
    async def save_table(self, name: str, rows: list[dict[str, Any]]) -> Path:
        """Write a per-level table as CSV."""
        pass

    @abstractmethod
    async def save_trajectory(self, name: str, trajectory: Trajectory) -> Path:
        pass

    @abstractmethod
    async def save_path(self, name: str, path: BrownianPath) -> Path:
        pass

    @abstractmethod
    async def save_manifest(self, manifest: RunManifest) -> Path:
        pass

    @abstractmethod
    async def load_reports(self) -> dict[str, dict[str, Any]]:
        """All JSON reports in the output directory, keyed by file stem."""
        pass
