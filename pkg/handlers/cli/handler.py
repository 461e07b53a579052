"""Command-line interface: one subcommand per experiment."""

import argparse
import asyncio
from typing import Any, Awaitable, Callable

import pandas as pd
from pydantic import BaseModel, ValidationError

from core.config import settings
from core.exceptions import (
    ArgumentError,
    ConfigurationError,
    QuotaBreachError,
    ReportWriteError,
    WongZakaiError,
)
from core.lifespan import RunContext, run_lifespan
from core.logging import get_logger, setup_logging
from di.repositories import get_output_dir, get_report_repository
from di.services import get_experiment_service
from domain.experiment import ExperimentConfig, load_experiment_config
from domain.reports import ConvergenceReport, HypothesisReport
from models.registry import build_model
from repositories.interfaces import IReportRepository
from services.analysis import ExperimentService

logger = get_logger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_QUOTA = 3

Command = Callable[[argparse.Namespace, ExperimentService, IReportRepository, RunContext], Awaitable[int]]


def quota_breached(report: BaseModel) -> bool:
    verdict = getattr(report, "verdict", None)
    if verdict is not None and not verdict.quota_ok:
        return True
    if getattr(report, "quota_ok", True) is False:
        return True
    return any(quota_breached(r) for r in getattr(report, "reports", []))


def verdict_exit_code(report: BaseModel) -> int:
    if quota_breached(report):
        return EXIT_QUOTA
    return EXIT_PASS if report.passed else EXIT_FAIL


def error_exit_code(error: WongZakaiError) -> int:
    if isinstance(error, (ConfigurationError, ArgumentError)):
        return EXIT_USAGE
    if isinstance(error, QuotaBreachError):
        return EXIT_QUOTA
    return EXIT_FAIL


def report_passed(data: dict[str, Any]) -> bool | None:
    """Pass/fail of a saved JSON report; None for reports without a verdict."""
    if "verdict" in data:
        return bool(data["verdict"].get("passed"))
    if "passed" in data:
        return bool(data["passed"])
    if "checks" in data:
        return all(c.get("pass") for c in data["checks"])
    if "nonincreasing" in data:
        return bool(data["nonincreasing"])
    if "reports" in data:
        return all(report_passed(r) for r in data["reports"])
    return None


async def _save(name: str, report: BaseModel, repository: IReportRepository, context: RunContext) -> int:
    context.record(
        await repository.save_report(name, report),
        await repository.save_table(name, report.table_rows()),
    )
    code = verdict_exit_code(report)
    if code != EXIT_PASS:
        if isinstance(report, HypothesisReport):
            detail = ", ".join(report.failing())
        elif isinstance(report, ConvergenceReport):
            detail = report.verdict.model_dump()
        else:
            detail = "see report"
        logger.warning(f"{name}: verdict fail ({detail})")
    else:
        logger.info(f"{name}: verdict pass")
    return code


async def cmd_simulate(args: argparse.Namespace, service: ExperimentService, repository: IReportRepository, context: RunContext) -> int:
    summary, ito, wz, path = await service.simulate()
    context.record(await repository.save_report("simulate", summary))
    if args.emit_trajectory:
        context.record(
            await repository.save_trajectory("trajectory_ito", ito),
            await repository.save_trajectory(f"trajectory_wz_m{summary.m}", wz),
        )
    if args.emit_path:
        context.record(await repository.save_path("path", path))
    return EXIT_PASS


async def cmd_converge(args: argparse.Namespace, service: ExperimentService, repository: IReportRepository, context: RunContext) -> int:
    return await _save("converge", await service.convergence_study(), repository, context)


async def cmd_skeleton(args: argparse.Namespace, service: ExperimentService, repository: IReportRepository, context: RunContext) -> int:
    return await _save("skeleton", await service.skeleton_convergence_study(), repository, context)


async def cmd_modulus(args: argparse.Namespace, service: ExperimentService, repository: IReportRepository, context: RunContext) -> int:
    return await _save("modulus", await service.increment_modulus(), repository, context)


async def cmd_probe(args: argparse.Namespace, service: ExperimentService, repository: IReportRepository, context: RunContext) -> int:
    return await _save("probe", await service.probe(), repository, context)


async def cmd_identity(args: argparse.Namespace, service: ExperimentService, repository: IReportRepository, context: RunContext) -> int:
    return await _save("identity", await service.identity(), repository, context)


async def cmd_tails(args: argparse.Namespace, service: ExperimentService, repository: IReportRepository, context: RunContext) -> int:
    return await _save("tails", await service.tails(), repository, context)


async def cmd_energy(args: argparse.Namespace, service: ExperimentService, repository: IReportRepository, context: RunContext) -> int:
    return await _save("energy", await service.energy_study(), repository, context)


async def cmd_guard(args: argparse.Namespace, service: ExperimentService, repository: IReportRepository, context: RunContext) -> int:
    return await _save("guard", await service.guard_study(), repository, context)


async def cmd_refine(args: argparse.Namespace, service: ExperimentService, repository: IReportRepository, context: RunContext) -> int:
    return await _save("refine", await service.n_refinement_study(), repository, context)


COMMANDS: dict[str, tuple[Command, str]] = {
    "simulate": (cmd_simulate, "One seed: Itô reference and top-level Wong–Zakai run"),
    "converge": (cmd_converge, "Mean-square sup error of Y^m against the reference"),
    "skeleton": (cmd_skeleton, "Convergence of the controlled system to the skeleton"),
    "modulus": (cmd_modulus, "Time-increment moduli of Y and Y^m"),
    "probe": (cmd_probe, "Randomized audit of the monotonicity hypotheses"),
    "identity": (cmd_identity, "Rearrangement identity of the frozen Itô integral"),
    "tails": (cmd_tails, "Tail probabilities of the smoothed derivative"),
    "energy": (cmd_energy, "Uniform energy bound across levels"),
    "guard": (cmd_guard, "Exit fractions per norm guard"),
    "refine": (cmd_refine, "Convergence study over Galerkin dimensions"),
}


async def cmd_report(args: argparse.Namespace) -> int:
    """Summary table of a saved report directory on stdout and as summary.csv."""
    repository = get_report_repository(get_output_dir(flag=args.out))
    reports = await repository.load_reports()
    if not reports:
        logger.error("No reports found")
        return EXIT_USAGE
    rows = []
    for stem, data in reports.items():
        metadata = data.get("metadata", {})
        rows.append(
            {
                "report": stem,
                "experiment": metadata.get("experiment", ""),
                "model": metadata.get("model", ""),
                "seed": metadata.get("seed"),
                "config_hash": metadata.get("config_hash", ""),
                "passed": report_passed(data),
            }
        )
    print(pd.DataFrame(rows).to_string(index=False))
    await repository.save_table("summary", rows)
    return EXIT_FAIL if any(r["passed"] is False for r in rows) else EXIT_PASS


async def run_command(args: argparse.Namespace, config: ExperimentConfig) -> int:
    threads = settings.resolve_threads(args.threads)
    repository = get_report_repository(get_output_dir(config, args.out))
    service = get_experiment_service(config, threads)
    command, _ = COMMANDS[args.command]
    async with run_lifespan(args.command, config, args.config, threads, repository) as context:
        try:
            context.exit_code = await command(args, service, repository, context)
        except WongZakaiError as e:
            logger.error(f"{args.command}: {str(e)}")
            context.exit_code = error_exit_code(e)
        except Exception:
            context.exit_code = EXIT_FAIL
            raise
    return context.exit_code


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="TOML experiment config")
    common.add_argument("--seed", type=int, default=None, help="Override [experiment].seed")
    common.add_argument("--paths", type=int, default=None, help="Override [experiment].n_paths")
    common.add_argument("--out", default=None, help="Output directory (flag > config > WZ_OUTPUT_DIR)")
    common.add_argument("--threads", type=int, default=None, help="Worker threads (flag > WZ_THREADS > cpu count)")

    parser = argparse.ArgumentParser(prog="wong-zakai", description=f"{settings.app_name} v{settings.version}")
    parser.add_argument("--log-level", default=None, help="Override WZ_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name == "simulate":
            p.add_argument("--emit-trajectory", action="store_true", help="Write both trajectories as CSV")
            p.add_argument("--emit-path", action="store_true", help="Write the Brownian path as CSV")
    report = sub.add_parser("report", help="Summarize a directory of saved reports")
    report.add_argument("--out", default=None, help="Report directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)

    if args.command == "report":
        try:
            return asyncio.run(cmd_report(args))
        except ReportWriteError as e:
            logger.error(str(e))
            return EXIT_USAGE

    try:
        config = load_experiment_config(args.config).with_overrides(args.seed, args.paths, args.out)
        build_model(config.model.name, config.model.params, config.noise)
    except (ConfigurationError, ArgumentError) as e:
        logger.error(str(e))
        return EXIT_USAGE
    except ValidationError as e:
        logger.error(f"Invalid command-line override: {e.errors()[0]['msg']}")
        return EXIT_USAGE

    try:
        return asyncio.run(run_command(args, config))
    except ReportWriteError as e:
        logger.error(str(e))
        return EXIT_FAIL
