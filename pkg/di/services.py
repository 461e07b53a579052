from core.config import settings
from domain.experiment import ExperimentConfig
from services.analysis import ExperimentService


def get_experiment_service(config: ExperimentConfig, threads: int | None = None) -> ExperimentService:
    return ExperimentService(config, threads=settings.resolve_threads(threads), progress=settings.progress)
