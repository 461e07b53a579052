"""Monte-Carlo experiments over coupled Brownian paths."""

import asyncio
import math
import sys
from typing import Any, Callable, TypeVar

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import stats
from tqdm import tqdm

from core.config import settings
from core.exceptions import ArgumentError, BlowUpError, ExperimentError, QuotaBreachError, WongZakaiError
from core.logging import get_logger
from domain.experiment import ExperimentConfig, SkeletonSection, Thresholds
from domain.noise import BrownianPath, WzDriver, sample_path
from domain.operators import ControlPath
from domain.reports import (
    ConvergenceReport,
    ConvergenceVerdict,
    EnergyReport,
    GuardRow,
    GuardTable,
    HypothesisReport,
    IdentityReport,
    ModulusReport,
    ModulusVariant,
    RefinementReport,
    RunMetadata,
    SimulationSummary,
    TailReport,
)
from domain.trajectory import SolverConfig, Trajectory
from models.base import ModelSpec
from models.registry import build_model
from services.hypotheses import probe_hypotheses
from services.identity import identity_study
from services.solvers import (
    oracle_trajectory,
    skeleton_bundle,
    skeleton_oracle_trajectory,
    skeleton_wz_bundle,
    solve_controlled,
    solve_ito,
    solve_wong_zakai,
    sup_h_distance,
)
from services.tails import noise_exit_time, tail_study

logger = get_logger(__name__)

ResultT = TypeVar("ResultT")

MODULUS_VARIANTS = ("floor", "floor_prev", "ceil")


# ----------------------------------------------------------------------
# Statistics shared by the studies
# ----------------------------------------------------------------------
def mean_and_se(values: list[float] | np.ndarray) -> tuple[float, float]:
    """Sample mean and standard error over independent replicates."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return math.nan, math.nan
    if arr.size == 1:
        return float(arr[0]), 0.0
    return float(np.mean(arr)), float(np.std(arr, ddof=1) / math.sqrt(arr.size))


def fit_log2_slope(levels: list[int], values: list[float]) -> tuple[float, tuple[float, float]]:
    """Least-squares slope of log₂(value) against level with a 95% t-interval."""
    x = np.asarray(levels, dtype=float)
    y = np.asarray(values, dtype=float)
    keep = np.isfinite(y) & (y > 0.0)
    if np.count_nonzero(keep) < 3:
        return math.nan, (math.nan, math.nan)
    fit = stats.linregress(x[keep], np.log2(y[keep]))
    half = stats.t.ppf(0.975, np.count_nonzero(keep) - 2) * fit.stderr
    return float(fit.slope), (float(fit.slope - half), float(fit.slope + half))


def trend_verdict(
    errors: list[float],
    std_errors: list[float],
    thresholds: Thresholds,
    n_blowups: int = 0,
    n_paths: int = 1,
) -> ConvergenceVerdict:
    """Monotone decrease up to tolerated inversions, plus the total reduction and blow-up quota."""
    quota_ok = n_blowups <= thresholds.blowup_quota * n_paths
    if errors and max(errors) <= thresholds.zero_noise_tolerance:
        return ConvergenceVerdict(
            monotone=True, inversions=0, final_ratio=0.0, ratio_ok=True, quota_ok=quota_ok, passed=quota_ok
        )

    inversions = 0
    within = True
    for a, b, sa, sb in zip(errors, errors[1:], std_errors, std_errors[1:]):
        if b > a:
            inversions += 1
            if b - a > thresholds.inversion_se * math.hypot(sa, sb):
                within = False
    monotone = within and inversions <= thresholds.max_inversions
    final_ratio = errors[-1] / errors[0] if errors[0] > 0.0 else math.inf
    ratio_ok = final_ratio < thresholds.final_ratio
    return ConvergenceVerdict(
        monotone=monotone,
        inversions=inversions,
        final_ratio=final_ratio,
        ratio_ok=ratio_ok,
        quota_ok=quota_ok,
        passed=monotone and ratio_ok and quota_ok,
    )


def increment_moduli(traj: Trajectory, m: int, tau: float | None = None) -> dict[str, float]:
    """Left-point quadratures of ∫_0^τ ‖X(l) − X(anchor(l))‖²_H dl on the stored grid.

    Anchors are ⌊l/ϖ⌋ϖ, (⌊l/ϖ⌋ − 1)ϖ and ⌈l/ϖ⌉ϖ; X is y₀ before 0 and X(T) after T.
    """
    T = traj.final_time
    varpi = T / 2 ** m
    tau = T if tau is None else min(tau, T)
    times = traj.times[:-1]
    keep = times < tau
    left = times[keep]
    widths = np.diff(traj.times)[keep]
    states = traj.states[:-1][keep]
    position = np.round(left / varpi, 9)
    anchors = {
        "floor": np.floor(position) * varpi,
        "floor_prev": np.clip((np.floor(position) - 1.0) * varpi, 0.0, T),
        "ceil": np.clip(np.ceil(position) * varpi, 0.0, T),
    }
    out = {}
    for name, anchor_times in anchors.items():
        diff = states - traj.interpolate(anchor_times)
        out[name] = float(np.sum(widths * traj.norm_h_rows(diff) ** 2))
    return out


def guard_statistics(model_name: str, m: int, exits: dict[float, list[bool]]) -> list[GuardRow]:
    """Exit fractions per guard level; rows ordered by increasing M_guard."""
    rows = []
    for guard in sorted(exits):
        flags = np.asarray(exits[guard], dtype=float)
        fraction, se = mean_and_se(flags)
        rows.append(
            GuardRow(
                model=model_name,
                m=m,
                max_norm_guard=guard,
                n_paths=int(flags.size),
                n_exited=int(flags.sum()),
                exit_fraction=fraction,
                std_error=se,
            )
        )
    return rows


def build_control(section: SkeletonSection, dimension: int, T: float) -> ControlPath:
    """Constant or single-mode sine control on [0, T]."""
    if section.kind == "constant":
        values = np.zeros(dimension)
        given = np.asarray(section.values, dtype=float)[:dimension]
        values[: given.size] = given
        return ControlPath.constant(values, T)
    if section.mode > dimension:
        raise ArgumentError(f"Control mode {section.mode} exceeds noise dimension {dimension}")

    def sine(t: float) -> np.ndarray:
        g = np.zeros(dimension)
        g[section.mode - 1] = section.amplitude * math.sin(2.0 * math.pi * section.frequency * t)
        return g

    return ControlPath.from_function(sine, T, n_points=section.table_points)


class _ConvergenceOutcome(BaseModel):
    model_config = ConfigDict(frozen=True)

    errors: list[float] = []
    terminal_gap: float = math.nan
    blew_up: bool = False


class _ModulusOutcome(BaseModel):
    model_config = ConfigDict(frozen=True)

    values: dict[str, list[float]] = {}
    blew_up: bool = False


class _EnergyOutcome(BaseModel):
    model_config = ConfigDict(frozen=True)

    wz: list[float] = []
    controlled: list[float] = []
    ito: float = math.nan
    blew_up: bool = False


class ExperimentService:
    """Runs the studies of one experiment config over an ensemble of coupled paths."""

    def __init__(self, config: ExperimentConfig, threads: int = 1, progress: bool | None = None) -> None:
        """Initialize experiment service."""
        self.config = config
        self.threads = max(1, threads)
        self.progress = settings.progress if progress is None else progress

    # ------------------------------------------------------------------
    # Plumbing
    # ------------------------------------------------------------------
    def build_model(self, params: dict[str, Any] | None = None) -> ModelSpec:
        cfg = self.config
        return build_model(cfg.model.name, params if params is not None else cfg.model.params, cfg.noise)

    def metadata(self, experiment: str, model: ModelSpec | None = None, seed: int | None = None) -> RunMetadata:
        cfg = self.config
        return RunMetadata(
            experiment=experiment,
            model=model.name if model is not None else cfg.model.name,
            noise=cfg.noise.kind.value,
            seed=cfg.experiment.seed if seed is None else seed,
            config_hash=cfg.config_hash(),
            version=settings.version,
        )

    def _path_level(self, levels: list[int]) -> int:
        cfg = self.config
        return max(cfg.path_level, cfg.solver.wz_step_level(max(levels)), cfg.reference_dt_level)

    def _reference_kind(self, model: ModelSpec) -> str:
        choice = self.config.experiment.reference
        if choice == "oracle" and model.analytic_oracle is None:
            raise ArgumentError(f"Model '{model.name}' has no closed form; use reference = 'ito'")
        if choice == "ito" or model.analytic_oracle is None:
            return "ito"
        return "oracle"

    def _reference_config(self) -> SolverConfig:
        return self.config.solver.model_copy(update={"dt_level": self.config.reference_dt_level})

    def _reference(self, model: ModelSpec, path: BrownianPath, kind: str, oracle_kind: str = "ito") -> Trajectory:
        if kind == "oracle":
            return oracle_trajectory(model, path, self.config.solver.m_store, oracle_kind)
        return solve_ito(model, path, self._reference_config())

    async def _run_paths(self, worker: Callable[[int], ResultT], n_paths: int, desc: str) -> list[ResultT]:
        """worker(p) for p = 0..n_paths−1 on a bounded thread pool; results in path order."""
        semaphore = asyncio.Semaphore(self.threads)
        results: list[Any] = [None] * n_paths

        with tqdm(total=n_paths, desc=desc, disable=not self.progress, file=sys.stderr, leave=False) as bar:
            async def run(p: int) -> None:
                async with semaphore:
                    results[p] = await asyncio.to_thread(worker, p)
                    bar.update(1)

            await asyncio.gather(*(run(p) for p in range(n_paths)))
        return results

    def _check_ensemble(self, n_paths: int) -> None:
        if n_paths < 1:
            raise ArgumentError("n_paths must be positive")
        if n_paths < 50:
            logger.warning(f"Only {n_paths} paths; standard errors will be unreliable")

    # ------------------------------------------------------------------
    # Single path
    # ------------------------------------------------------------------
    async def simulate(self, seed: int | None = None) -> tuple[SimulationSummary, Trajectory, Trajectory, BrownianPath]:
        """Itô reference and the top-level Wong–Zakai run on one path."""
        cfg = self.config
        model = self.build_model()
        m = cfg.experiment.m_levels[-1]
        seed = cfg.experiment.seed if seed is None else seed
        path = sample_path(seed, cfg.experiment.T, self._path_level([m]), model.noise.n_noise_modes)
        try:
            ito = await asyncio.to_thread(solve_ito, model, path, self._reference_config())
            wz = await asyncio.to_thread(solve_wong_zakai, model, path, m, cfg.solver)
        except WongZakaiError:
            raise
        except Exception as e:
            logger.error(f"Simulation failed: {str(e)}")
            raise ExperimentError(f"Simulation failed: {str(e)}")

        summary = SimulationSummary(
            metadata=self.metadata("simulate", model, seed),
            m=m,
            T=cfg.experiment.T,
            step_level_ito=ito.step_level,
            step_level_wz=wz.step_level,
            final_norm_h_ito=float(ito.norms_h[-1]),
            final_norm_h_wz=float(wz.norms_h[-1]),
            sup_distance=sup_h_distance(wz, ito),
            energy_ito=ito.energy(),
            energy_wz=wz.energy(),
            exited_at_ito=ito.exited_at,
            exited_at_wz=wz.exited_at,
        )
        logger.info(f"Simulated {model.name} seed={seed}: sup‖Y − Y^{m}‖_H = {summary.sup_distance:.4e}")
        return summary, ito, wz, path

    # ------------------------------------------------------------------
    # Convergence
    # ------------------------------------------------------------------
    async def convergence_study(
        self,
        model: ModelSpec | None = None,
        m_levels: list[int] | None = None,
        n_paths: int | None = None,
        seed: int | None = None,
    ) -> ConvergenceReport:
        """E[sup_t ‖Y − Y^m‖²_H] per level, Y^m and Y on the same path."""
        cfg = self.config
        model = model or self.build_model()
        m_levels = m_levels or cfg.experiment.m_levels
        n_paths = n_paths or cfg.experiment.n_paths
        seed = cfg.experiment.seed if seed is None else seed
        self._check_ensemble(n_paths)

        kind = self._reference_kind(model)
        corrected = cfg.solver.correction
        if kind == "oracle":
            reference = "oracle" if corrected else "stratonovich-oracle"
        else:
            reference = "ito"
        level = self._path_level(m_levels)
        d = model.noise.n_noise_modes
        T = cfg.experiment.T

        def worker(p: int) -> _ConvergenceOutcome:
            path = sample_path(seed + p, T, level, d)
            try:
                if kind == "oracle":
                    target = oracle_trajectory(model, path, cfg.solver.m_store, "ito" if corrected else "stratonovich")
                    ito = target if corrected else oracle_trajectory(model, path, cfg.solver.m_store, "ito")
                else:
                    target = ito = solve_ito(model, path, self._reference_config())
                errors = []
                wz = None
                for m in m_levels:
                    wz = solve_wong_zakai(model, path, m, cfg.solver)
                    errors.append(sup_h_distance(wz, target) ** 2)
                gap = float(wz.norms_h[-1] - ito.norms_h[-1])
            except BlowUpError as e:
                logger.debug(f"Path {seed + p} blew up at t={e.last_valid_time:.4g}")
                return _ConvergenceOutcome(blew_up=True)
            return _ConvergenceOutcome(errors=errors, terminal_gap=gap)

        logger.info(
            f"Convergence study: model={model.name}, reference={reference}, m={m_levels}, {n_paths} paths"
        )
        outcomes = await self._run_paths(worker, n_paths, f"converge {model.name}")
        return self._convergence_report("converge", model, reference, m_levels, n_paths, seed, outcomes)

    def _convergence_report(
        self,
        experiment: str,
        model: ModelSpec,
        reference: str,
        m_levels: list[int],
        n_paths: int,
        seed: int,
        outcomes: list[_ConvergenceOutcome],
    ) -> ConvergenceReport:
        thresholds = self.config.thresholds
        good = [o for o in outcomes if not o.blew_up]
        n_blowups = n_paths - len(good)
        if n_blowups:
            logger.warning(f"{n_blowups}/{n_paths} paths blew up (quota {thresholds.blowup_quota:.1%})")
        if not good:
            raise QuotaBreachError(f"All {n_paths} paths blew up; nothing to report")

        table = np.array([o.errors for o in good])
        means, ses = zip(*(mean_and_se(table[:, j]) for j in range(len(m_levels))))
        slope, ci = fit_log2_slope(m_levels, list(means))
        verdict = trend_verdict(list(means), list(ses), thresholds, n_blowups, n_paths)

        bias, bias_se = mean_and_se([o.terminal_gap for o in good])
        if reference == "stratonovich-oracle":
            bias_ok = abs(bias) > thresholds.correction_bias_se * bias_se
            verdict = verdict.model_copy(update={"bias_ok": bias_ok, "passed": verdict.passed and bias_ok})

        for m, e, s in zip(m_levels, means, ses):
            logger.info(f"  m={m}: E[sup‖·‖²_H] = {e:.4e} ± {s:.2e}")
        logger.info(
            f"Verdict {'pass' if verdict.passed else 'fail'}: inversions={verdict.inversions}, "
            f"final/first={verdict.final_ratio:.3f}, slope={slope:.3f}"
        )
        return ConvergenceReport(
            metadata=self.metadata(experiment, model, seed),
            reference=reference,
            m_levels=list(m_levels),
            mean_sq_sup_error=list(means),
            std_error=list(ses),
            n_effective=[len(good)] * len(m_levels),
            n_paths=n_paths,
            n_blowups=n_blowups,
            fitted_log2_slope=slope,
            slope_ci=ci,
            terminal_bias=bias,
            terminal_bias_se=bias_se,
            verdict=verdict,
        )

    def skeleton_reference(self, model: ModelSpec, control: ControlPath) -> tuple[Trajectory, str]:
        """Deterministic Z_g: closed form when available, else a fine controlled run."""
        cfg = self.config
        d = model.noise.n_noise_modes
        if self._reference_kind(model) == "oracle":
            return skeleton_oracle_trajectory(model, control, d, cfg.solver.m_store), "skeleton-oracle"
        # Z_g reads no Brownian values; the path only fixes T and the noise dimension
        path = sample_path(cfg.experiment.seed, control.horizon, 1, d)
        traj = solve_controlled(model, skeleton_bundle(model, control, d), path, 1, self._reference_config())
        return traj, "skeleton"

    async def skeleton_convergence_study(
        self,
        model: ModelSpec | None = None,
        control: ControlPath | None = None,
        m_levels: list[int] | None = None,
        n_paths: int | None = None,
        seed: int | None = None,
    ) -> ConvergenceReport:
        """E[sup_t ‖Z_g^m − Z_g‖²_H] per level."""
        cfg = self.config
        model = model or self.build_model()
        m_levels = m_levels or cfg.experiment.m_levels
        n_paths = n_paths or cfg.experiment.n_paths
        seed = cfg.experiment.seed if seed is None else seed
        T = cfg.experiment.T
        d = model.noise.n_noise_modes
        control = control or build_control(cfg.skeleton, d, T)
        self._check_ensemble(n_paths)

        target, reference = await asyncio.to_thread(self.skeleton_reference, model, control)
        bundle = skeleton_wz_bundle(model, control)
        level = self._path_level(m_levels)

        def worker(p: int) -> _ConvergenceOutcome:
            path = sample_path(seed + p, T, level, d)
            try:
                errors = []
                z = None
                for m in m_levels:
                    z = solve_controlled(model, bundle, path, m, cfg.solver)
                    errors.append(sup_h_distance(z, target) ** 2)
            except BlowUpError as e:
                logger.debug(f"Path {seed + p} blew up at t={e.last_valid_time:.4g}")
                return _ConvergenceOutcome(blew_up=True)
            return _ConvergenceOutcome(errors=errors, terminal_gap=float(z.norms_h[-1] - target.norms_h[-1]))

        logger.info(f"Skeleton study: model={model.name}, ∫‖g‖² = {control.l2_norm_sq():.4g}, m={m_levels}")
        outcomes = await self._run_paths(worker, n_paths, f"skeleton {model.name}")
        return self._convergence_report("skeleton", model, reference, m_levels, n_paths, seed, outcomes)

    async def n_refinement_study(self, n_list: list[int] | None = None) -> RefinementReport:
        """The convergence study repeated for several Galerkin dimensions."""
        cfg = self.config
        n_list = n_list or cfg.refinement.n_list
        if cfg.model.name == "gbm":
            raise ArgumentError("The scalar model has no Galerkin dimension to refine")
        reports = []
        for n in n_list:
            model = self.build_model({**cfg.model.params, "n_modes": n})
            logger.info(f"Refinement: n = {n}")
            reports.append(await self.convergence_study(model=model))
        return RefinementReport(metadata=self.metadata("refine"), n_list=list(n_list), reports=reports)

    # ------------------------------------------------------------------
    # Moduli, energy, guard
    # ------------------------------------------------------------------
    async def increment_modulus(
        self,
        model: ModelSpec | None = None,
        m_levels: list[int] | None = None,
        n_paths: int | None = None,
        seed: int | None = None,
    ) -> ModulusReport:
        """Time-increment moduli of Y and Y^m for three anchor choices."""
        cfg = self.config
        model = model or self.build_model()
        m_levels = m_levels or cfg.modulus.m_levels
        n_paths = n_paths or cfg.experiment.n_paths
        seed = cfg.experiment.seed if seed is None else seed
        self._check_ensemble(n_paths)
        kind = self._reference_kind(model)
        level = self._path_level(m_levels)
        d = model.noise.n_noise_modes
        T = cfg.experiment.T
        names = [f"{who}_{v}" for who in ("Y", "Ym") for v in MODULUS_VARIANTS]

        def worker(p: int) -> _ModulusOutcome:
            path = sample_path(seed + p, T, level, d)
            values: dict[str, list[float]] = {name: [] for name in names}
            try:
                y = self._reference(model, path, kind)
                for m in m_levels:
                    ym = solve_wong_zakai(model, path, m, cfg.solver)
                    noise_exit = noise_exit_time(WzDriver(path=path, m=m), cfg.tails.delta)
                    tau = min(t for t in (T, y.exited_at, ym.exited_at, noise_exit) if t is not None)
                    for who, traj in (("Y", y), ("Ym", ym)):
                        for variant, value in increment_moduli(traj, m, tau).items():
                            values[f"{who}_{variant}"].append(value)
            except BlowUpError:
                return _ModulusOutcome(blew_up=True)
            return _ModulusOutcome(values=values)

        logger.info(f"Increment modulus: model={model.name}, m={m_levels}, {n_paths} paths")
        outcomes = await self._run_paths(worker, n_paths, f"modulus {model.name}")
        good = [o for o in outcomes if not o.blew_up]
        if not good:
            raise QuotaBreachError(f"All {n_paths} paths blew up; nothing to report")

        threshold = cfg.thresholds.modulus_slope
        variants = []
        for name in names:
            table = np.array([o.values[name] for o in good])
            means, ses = zip(*(mean_and_se(table[:, j]) for j in range(len(m_levels))))
            slope, ci = fit_log2_slope(m_levels, list(means))
            # a modulus that vanishes identically decays at any rate
            passed = bool(max(means) <= cfg.thresholds.zero_noise_tolerance or slope <= threshold)
            variants.append(
                ModulusVariant(
                    name=name, estimates=list(means), std_error=list(ses),
                    fitted_log2_slope=slope, slope_ci=ci, passed=passed,
                )
            )
            logger.info(f"  {name}: slope {slope:.3f} ({'pass' if passed else 'fail'})")

        n_blowups = n_paths - len(good)
        quota_ok = n_blowups <= cfg.thresholds.blowup_quota * n_paths
        return ModulusReport(
            metadata=self.metadata("modulus", model, seed),
            m_levels=list(m_levels),
            n_paths=n_paths,
            n_blowups=n_blowups,
            quota_ok=quota_ok,
            threshold_slope=threshold,
            variants=variants,
            passed=quota_ok and all(v.passed for v in variants),
        )

    async def energy_study(
        self,
        model: ModelSpec | None = None,
        m_levels: list[int] | None = None,
        n_paths: int | None = None,
        seed: int | None = None,
    ) -> EnergyReport:
        """E[sup_t ‖Y^m‖²_H + ∫‖Y^m‖^β_V] per level, with the Itô and controlled analogues."""
        cfg = self.config
        model = model or self.build_model()
        m_levels = m_levels or cfg.experiment.m_levels
        n_paths = n_paths or cfg.experiment.n_paths
        seed = cfg.experiment.seed if seed is None else seed
        self._check_ensemble(n_paths)
        level = self._path_level(m_levels)
        d = model.noise.n_noise_modes
        T = cfg.experiment.T
        with_ito = cfg.energy.include_ito
        with_controlled = cfg.energy.include_controlled
        bundle = skeleton_wz_bundle(model, build_control(cfg.skeleton, d, T)) if with_controlled else None

        def worker(p: int) -> _EnergyOutcome:
            path = sample_path(seed + p, T, level, d)
            try:
                wz = [solve_wong_zakai(model, path, m, cfg.solver).energy() for m in m_levels]
                controlled = (
                    [solve_controlled(model, bundle, path, m, cfg.solver).energy() for m in m_levels]
                    if bundle is not None
                    else []
                )
                ito = solve_ito(model, path, self._reference_config()).energy() if with_ito else math.nan
            except BlowUpError:
                return _EnergyOutcome(blew_up=True)
            return _EnergyOutcome(wz=wz, controlled=controlled, ito=ito)

        logger.info(f"Energy study: model={model.name}, m={m_levels}, {n_paths} paths")
        outcomes = await self._run_paths(worker, n_paths, f"energy {model.name}")
        good = [o for o in outcomes if not o.blew_up]
        if not good:
            raise QuotaBreachError(f"All {n_paths} paths blew up; nothing to report")

        table = np.array([o.wz for o in good])
        means, ses = zip(*(mean_and_se(table[:, j]) for j in range(len(m_levels))))
        ratio = max(means) / min(means) if min(means) > 0.0 else math.inf
        if max(means) == 0.0:
            ratio = 1.0
        controlled = None
        if with_controlled:
            ctable = np.array([o.controlled for o in good])
            controlled = [mean_and_se(ctable[:, j])[0] for j in range(len(m_levels))]
        ito = mean_and_se([o.ito for o in good])[0] if with_ito else None

        n_blowups = n_paths - len(good)
        quota_ok = n_blowups <= cfg.thresholds.blowup_quota * n_paths
        passed = ratio < cfg.thresholds.energy_ratio and quota_ok
        logger.info(f"Energy max/min across levels: {ratio:.3f} ({'pass' if passed else 'fail'})")
        return EnergyReport(
            metadata=self.metadata("energy", model, seed),
            m_levels=list(m_levels),
            n_paths=n_paths,
            n_blowups=n_blowups,
            quota_ok=quota_ok,
            mean_energy=list(means),
            std_error=list(ses),
            ito_energy=ito,
            controlled_energy=controlled,
            max_min_ratio=ratio,
            threshold_ratio=cfg.thresholds.energy_ratio,
            passed=passed,
        )

    async def guard_study(
        self,
        model: ModelSpec | None = None,
        n_paths: int | None = None,
        seed: int | None = None,
    ) -> GuardTable:
        """Empirical exit probabilities of the Wong–Zakai runs for each M_guard."""
        cfg = self.config
        model = model or self.build_model()
        n_paths = n_paths or cfg.experiment.n_paths
        seed = cfg.experiment.seed if seed is None else seed
        m = cfg.guard.m or cfg.experiment.m_levels[-1]
        guards = sorted(cfg.guard.levels)
        level = self._path_level([m])
        d = model.noise.n_noise_modes
        T = cfg.experiment.T

        def worker(p: int) -> list[bool]:
            path = sample_path(seed + p, T, level, d)
            flags = []
            for guard in guards:
                run_cfg = cfg.solver.model_copy(update={"max_norm_guard": guard})
                try:
                    flags.append(solve_wong_zakai(model, path, m, run_cfg).exited)
                except BlowUpError:
                    flags.append(True)
            return flags

        logger.info(f"Guard study: model={model.name}, m={m}, M_guard={guards}")
        outcomes = await self._run_paths(worker, n_paths, f"guard {model.name}")
        exits = {guard: [o[j] for o in outcomes] for j, guard in enumerate(guards)}
        rows = guard_statistics(model.name, m, exits)
        fractions = [r.exit_fraction for r in rows]
        nonincreasing = all(b <= a for a, b in zip(fractions, fractions[1:]))
        return GuardTable(metadata=self.metadata("guard", model, seed), rows=rows, nonincreasing=nonincreasing)

    # ------------------------------------------------------------------
    # Non-path studies
    # ------------------------------------------------------------------
    async def probe(self, seed: int | None = None) -> HypothesisReport:
        cfg = self.config
        model = self.build_model()
        seed = cfg.experiment.seed if seed is None else seed
        return await asyncio.to_thread(
            probe_hypotheses,
            model.drift,
            model.noise,
            model.space,
            cfg.probe,
            cfg.probe.n_trials,
            seed,
            cfg.thresholds.probe_tolerance,
            self.metadata("probe", model, seed),
        )

    async def identity(self, seed: int | None = None) -> IdentityReport:
        cfg = self.config
        section = cfg.identity
        seed = cfg.experiment.seed if seed is None else seed
        return await asyncio.to_thread(
            identity_study,
            list(section.noises),
            section.m_levels,
            section.n_seeds,
            seed,
            cfg.experiment.T,
            section.n_modes,
            section.n_noise_modes,
            section.t,
            cfg.thresholds.identity_tolerance,
            self.metadata("identity", seed=seed),
        )

    async def tails(self, seed: int | None = None) -> TailReport:
        cfg = self.config
        seed = cfg.experiment.seed if seed is None else seed
        return await asyncio.to_thread(
            tail_study,
            cfg.experiment.T,
            cfg.tails.m_levels,
            cfg.tails.delta,
            cfg.tails.n_samples,
            seed,
            cfg.thresholds.tail_max_final,
            cfg.thresholds.inversion_se,
            self.metadata("tails", seed=seed),
        )
