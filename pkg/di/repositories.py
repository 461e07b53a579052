from pathlib import Path

from core.config import settings
from domain.experiment import ExperimentConfig
from repositories.interfaces import IReportRepository
from repositories.reports import FileReportRepository


def get_output_dir(config: ExperimentConfig | None = None, flag: str | None = None) -> Path:
    """Output directory with precedence --out flag > config file > WZ_OUTPUT_DIR."""
    if flag:
        return Path(flag)
    if config is not None and config.experiment.output_dir:
        return Path(config.experiment.output_dir)
    return Path(settings.output_dir)


def get_report_repository(output_dir: str | Path) -> IReportRepository:
    return FileReportRepository(output_dir)
