"""Report models written by the experiments."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field


class RunMetadata(BaseModel):
    """Provenance embedded in every report."""

    experiment: str = Field(..., description="Experiment kind, e.g. 'converge'")
    model: str = Field(..., description="Model registry name")
    noise: str = Field(default="", description="Noise family")
    seed: int = Field(..., ge=0)
    config_hash: str = Field(default="", description="Truncated SHA-256 of the validated config")
    version: str = Field(default="", description="Artifact version")


class InequalityCheck(BaseModel):
    """Worst sampled margin of one hypothesis inequality."""

    model_config = ConfigDict(populate_by_name=True)

    name: str
    worst_margin: float = Field(..., description="max over samples of (lhs − rhs)/max(|lhs|, |rhs|, 1e-12)")
    argmax_sample_norms: list[float] = Field(default_factory=list, description="H norms of the worst sample")
    passed: bool = Field(..., alias="pass")
    non_finite: int = Field(default=0, ge=0, description="Samples whose operator output was not finite")


class HypothesisReport(BaseModel):
    """All audited inequalities of one model."""

    metadata: RunMetadata
    n_trials: int
    r_max: float
    tolerance: float
    checks: list[InequalityCheck] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failing(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def table_rows(self) -> list[dict]:
        return [
            {"name": c.name, "worst_margin": c.worst_margin, "pass": c.passed, "non_finite": c.non_finite}
            for c in self.checks
        ]


class ConvergenceVerdict(BaseModel):
    """Trend-based verdict of a convergence study."""

    monotone: bool = Field(..., description="Nonincreasing up to the allowed inversions")
    inversions: int = Field(..., ge=0)
    final_ratio: float = Field(..., description="final-level error / first-level error")
    ratio_ok: bool
    quota_ok: bool
    bias_ok: bool | None = Field(default=None, description="Set for uncorrected runs: the Itô gap is significant")
    passed: bool


class ConvergenceReport(BaseModel):
    """Per-level E[sup_t ‖Y − Y^m‖²_H] statistics."""

    metadata: RunMetadata
    reference: str = Field(..., description="'oracle', 'ito', 'stratonovich-oracle', 'skeleton-oracle' or 'skeleton'")
    m_levels: list[int]
    mean_sq_sup_error: list[float]
    std_error: list[float]
    n_effective: list[int]
    n_paths: int
    n_blowups: int = 0
    fitted_log2_slope: float
    slope_ci: tuple[float, float]
    terminal_bias: float | None = Field(default=None, description="Mean of ‖Y^m(T)‖_H − ‖Y_Itô(T)‖_H at the top level")
    terminal_bias_se: float | None = None
    verdict: ConvergenceVerdict

    @property
    def passed(self) -> bool:
        return self.verdict.passed

    def table_rows(self) -> list[dict]:
        return [
            {"m": m, "error": e, "stderr": s, "n_effective": n}
            for m, e, s, n in zip(self.m_levels, self.mean_sq_sup_error, self.std_error, self.n_effective)
        ]


class ModulusVariant(BaseModel):
    """One increment-modulus functional across levels."""

    name: str
    estimates: list[float]
    std_error: list[float]
    fitted_log2_slope: float
    slope_ci: tuple[float, float]
    passed: bool


class ModulusReport(BaseModel):
    metadata: RunMetadata
    m_levels: list[int]
    n_paths: int
    n_blowups: int = 0
    quota_ok: bool = True
    threshold_slope: float
    reference_slope: float = -0.75
    variants: list[ModulusVariant]
    passed: bool

    def table_rows(self) -> list[dict]:
        rows = []
        for v in self.variants:
            for m, e, s in zip(self.m_levels, v.estimates, v.std_error):
                rows.append({"variant": v.name, "m": m, "estimate": e, "stderr": s})
        return rows


class TailReport(BaseModel):
    """Monte-Carlo and closed-form probabilities of the large-derivative events."""

    metadata: RunMetadata
    T: float
    delta: float
    n_samples: int
    m_levels: list[int]
    estimate_coordinate: list[float] = Field(..., description="P(max_i sup_s |β̇_i^m| > δ√m 2^{m/2})")
    estimate_norm: list[float] = Field(..., description="P(sup_s ‖Ẇ^m‖_U > δ m 2^{m/2})")
    closed_form_coordinate: list[float]
    closed_form_norm: list[float]
    std_error_coordinate: list[float]
    std_error_norm: list[float]
    nonincreasing: bool
    final_ok: bool
    passed: bool

    def table_rows(self) -> list[dict]:
        return [
            {
                "m": m,
                "p_coordinate": a,
                "p_coordinate_exact": b,
                "p_norm": c,
                "p_norm_exact": d,
            }
            for m, a, b, c, d in zip(
                self.m_levels,
                self.estimate_coordinate,
                self.closed_form_coordinate,
                self.estimate_norm,
                self.closed_form_norm,
            )
        ]


class EnergyReport(BaseModel):
    """E[sup_t ‖Y^m‖²_H + ∫‖Y^m‖^β_V] per level, with the Itô value for comparison."""

    metadata: RunMetadata
    m_levels: list[int]
    n_paths: int
    n_blowups: int = 0
    quota_ok: bool = True
    mean_energy: list[float]
    std_error: list[float]
    ito_energy: float | None = None
    controlled_energy: list[float] | None = None
    max_min_ratio: float
    threshold_ratio: float
    passed: bool

    def table_rows(self) -> list[dict]:
        return [{"m": m, "energy": e, "stderr": s} for m, e, s in zip(self.m_levels, self.mean_energy, self.std_error)]


class GuardRow(BaseModel):
    model: str
    m: int
    max_norm_guard: float
    n_paths: int
    n_exited: int
    exit_fraction: float
    std_error: float


class GuardTable(BaseModel):
    """Empirical P(τ_M < T) per (model, M_guard, m)."""

    metadata: RunMetadata
    rows: list[GuardRow]
    nonincreasing: bool

    @property
    def passed(self) -> bool:
        return self.nonincreasing

    def table_rows(self) -> list[dict]:
        return [r.model_dump() for r in self.rows]


class IdentityRow(BaseModel):
    noise: str
    m: int
    seed: int
    t: float
    residual: float
    scale: float
    partial_interval: bool = False


class IdentityReport(BaseModel):
    """Residuals of the σ(Y^m)Ẇ^m rearrangement identity."""

    metadata: RunMetadata
    tolerance: float
    rows: list[IdentityRow]
    max_relative_residual: float
    passed: bool

    def table_rows(self) -> list[dict]:
        return [r.model_dump() for r in self.rows]


class SimulationSummary(BaseModel):
    """One path: Itô reference and the Wong–Zakai run at one level."""

    metadata: RunMetadata
    m: int
    T: float
    step_level_ito: int
    step_level_wz: int
    final_norm_h_ito: float
    final_norm_h_wz: float
    sup_distance: float = Field(..., description="sup_t ‖Y − Y^m‖_H on the stored grid")
    energy_ito: float
    energy_wz: float
    exited_at_ito: float | None = None
    exited_at_wz: float | None = None

    @property
    def passed(self) -> bool:
        return True

    def table_rows(self) -> list[dict]:
        return [self.model_dump(exclude={"metadata"})]


class RefinementReport(BaseModel):
    """Convergence studies repeated over Galerkin dimensions."""

    metadata: RunMetadata
    n_list: list[int]
    reports: list[ConvergenceReport]

    @property
    def passed(self) -> bool:
        return all(r.verdict.passed for r in self.reports)

    def table_rows(self) -> list[dict]:
        rows = []
        for n, report in zip(self.n_list, self.reports):
            for row in report.table_rows():
                rows.append({"n_modes": n, **row})
        return rows


class RunManifest(BaseModel):
    """Written next to the outputs of every run."""

    command: str
    config_path: str
    config: dict = Field(default_factory=dict, description="Echo of the validated config")
    config_hash: str
    seed: int
    threads: int
    version: str
    started_at: str = Field(..., description="ISO-8601 UTC start time")
    wall_time_seconds: float = 0.0
    exit_code: int | None = None
    outputs: list[str] = Field(default_factory=list)
