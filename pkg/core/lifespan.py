"""Run lifecycle: timing and the manifest written next to every run's outputs."""

import time
from contextlib import asynccontextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import AsyncIterator

from core.config import settings
from core.logging import get_logger
from domain.experiment import ExperimentConfig
from domain.reports import RunManifest
from repositories.interfaces import IReportRepository

logger = get_logger(__name__)


class RunContext:
    """Collects output paths and the exit code while a command runs."""

    def __init__(self) -> None:
        self.outputs: list[str] = []
        self.exit_code: int | None = None

    def record(self, *paths: Path) -> None:
        self.outputs.extend(str(p) for p in paths)


@asynccontextmanager
async def run_lifespan(
    command: str,
    config: ExperimentConfig,
    config_path: str,
    threads: int,
    repository: IReportRepository,
) -> AsyncIterator[RunContext]:
    """Time one command and write manifest.json when it finishes, also on failure."""
    context = RunContext()
    started_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
    start = time.perf_counter()
    logger.info(f"{settings.app_name} v{settings.version}: {command} {config_path} ({threads} threads)")
    try:
        yield context
    except Exception as e:
        logger.error(f"Command {command} failed: {str(e)}")
        raise
    finally:
        wall = time.perf_counter() - start
        manifest = RunManifest(
            command=command,
            config_path=config_path,
            config=config.model_dump(mode="json"),
            config_hash=config.config_hash(),
            seed=config.experiment.seed,
            threads=threads,
            version=settings.version,
            started_at=started_at,
            wall_time_seconds=wall,
            exit_code=context.exit_code,
            outputs=context.outputs,
        )
        await repository.save_manifest(manifest)
        logger.info(f"Command {command} finished in {wall:.2f}s")
