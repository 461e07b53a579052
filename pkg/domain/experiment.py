"""Experiment configuration file schema and its TOML loader."""

from __future__ import annotations

import hashlib
import json
import re

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from core.config import settings
from core.exceptions import ConfigurationError
from domain.trajectory import SolverConfig
from models.noise_specs import NoiseSpec


class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class ExperimentSection(_Section):
    """Horizon, levels, ensemble size and seed."""

    name: str = Field(default="experiment", description="Free-form label")
    T: float = Field(default=1.0, gt=0.0, description="Horizon")
    m_levels: list[int] = Field(default_factory=lambda: [3, 4, 5, 6, 7, 8], description="Wong–Zakai levels")
    n_paths: int = Field(default=400, ge=1, description="Monte-Carlo paths")
    seed: int = Field(default=0, ge=0, lt=2 ** 64, description="Base seed; path p uses seed + p")
    reference: Literal["auto", "oracle", "ito"] = Field(default="auto", description="Reference for Y")
    reference_dt_level: int | None = Field(default=None, ge=1, description="Itô reference step level")
    path_level: int | None = Field(default=None, ge=1, description="Finest stored Brownian level")
    output_dir: str | None = Field(default=None, description="Overrides WZ_OUTPUT_DIR")

    @field_validator("m_levels")
    @classmethod
    def validate_levels(cls, v: list[int]) -> list[int]:
        """Levels must be positive and strictly increasing."""
        if not v:
            raise ValueError("m_levels cannot be empty")
        if v[0] < 1 or any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("m_levels must be positive and strictly increasing")
        return v


class ModelSection(_Section):
    name: str = Field(..., description="Registered model name")
    params: dict[str, Any] = Field(default_factory=dict, description="Keyword parameters of the model factory")


class Thresholds(_Section):
    """Every verdict threshold; defaults are the acceptance constants."""

    final_ratio: float = Field(default=0.25, gt=0.0, description="final/first error must stay below this")
    max_inversions: int = Field(default=1, ge=0)
    inversion_se: float = Field(default=2.0, ge=0.0, description="Inversions tolerated within this many SE")
    blowup_quota: float = Field(default=0.01, ge=0.0, le=1.0)
    modulus_slope: float = Field(default=-0.5)
    probe_tolerance: float = Field(default=1e-8, ge=0.0)
    identity_tolerance: float = Field(default=1e-12, ge=0.0)
    tail_max_final: float = Field(default=0.05, ge=0.0, le=1.0)
    energy_ratio: float = Field(default=2.0, gt=1.0)
    zero_noise_tolerance: float = Field(default=1e-6, ge=0.0, description="Errors below this pass outright")
    correction_bias_se: float = Field(default=5.0, ge=0.0, description="Uncorrected runs must miss Itô by this many SE")


class ProbeSection(_Section):
    """Sampler of the hypothesis audit."""

    n_trials: int = Field(default=1000, ge=1)
    r_max: float = Field(default=10.0, gt=0.0, description="Samples satisfy ‖y‖_H ≤ r_max")
    t_max: float = Field(default=1.0, gt=0.0, description="Times are drawn from [0, t_max]")
    lambda_points: int = Field(default=33, ge=5, description="λ-grid size of the hemicontinuity check")
    continuity_ratio: float = Field(default=0.75, gt=0.0, lt=1.0, description="Required jump shrink on grid halving")
    directions: int = Field(default=4, ge=1, description="Random directions per sample for operator norms")


class SkeletonSection(_Section):
    """Control g of the skeleton systems."""

    kind: Literal["constant", "sine"] = Field(default="constant")
    values: list[float] = Field(default_factory=list, description="Constant g, zero-padded to the noise dimension")
    amplitude: float = Field(default=1.0, description="Amplitude of g_mode(t) = A sin(2πft)")
    frequency: float = Field(default=1.0)
    mode: int = Field(default=1, ge=1, description="1-based noise mode carrying the sine")
    table_points: int = Field(default=1025, ge=2)


class TailsSection(_Section):
    delta: float = Field(default=2.0, gt=0.0)
    m_levels: list[int] = Field(default_factory=lambda: [3, 4, 5, 6, 7, 8])
    n_samples: int = Field(default=2000, ge=100)


class IdentitySection(_Section):
    m_levels: list[int] = Field(default_factory=lambda: [2, 3, 4, 5, 6])
    n_seeds: int = Field(default=50, ge=1)
    noises: list[Literal["additive", "linear", "tanh"]] = Field(default_factory=lambda: ["additive", "linear", "tanh"])
    n_modes: int = Field(default=8, ge=1, description="Galerkin dimension of the frozen states")
    n_noise_modes: int = Field(default=3, ge=1)
    t: float | None = Field(default=None, ge=0.0, description="Evaluation time, default T")


class GuardSection(_Section):
    levels: list[float] = Field(default_factory=lambda: [2.0, 5.0, 10.0, float("inf")], description="M_guard values")
    m: int | None = Field(default=None, ge=1, description="WZ level, default max(m_levels)")


class ModulusSection(_Section):
    m_levels: list[int] = Field(default_factory=lambda: [4, 5, 6, 7, 8, 9])


class EnergySection(_Section):
    include_ito: bool = True
    include_controlled: bool = False


class RefinementSection(_Section):
    n_list: list[int] = Field(default_factory=lambda: [8, 16, 32])


class ExperimentConfig(_Section):
    """One experiment file. Unknown keys anywhere are errors."""

    experiment: ExperimentSection = Field(default_factory=ExperimentSection)
    model: ModelSection
    noise: NoiseSpec = Field(default_factory=NoiseSpec)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    thresholds: Thresholds = Field(default_factory=Thresholds)
    probe: ProbeSection = Field(default_factory=ProbeSection)
    skeleton: SkeletonSection = Field(default_factory=SkeletonSection)
    tails: TailsSection = Field(default_factory=TailsSection)
    identity: IdentitySection = Field(default_factory=IdentitySection)
    guard: GuardSection = Field(default_factory=GuardSection)
    modulus: ModulusSection = Field(default_factory=ModulusSection)
    energy: EnergySection = Field(default_factory=EnergySection)
    refinement: RefinementSection = Field(default_factory=RefinementSection)

    @model_validator(mode="after")
    def validate_levels(self) -> ExperimentConfig:
        """The solver grid must resolve every Wong–Zakai level."""
        if self.solver.dt_level < self.experiment.m_levels[-1]:
            raise ValueError(
                f"solver.dt_level={self.solver.dt_level} is below max(m_levels)={self.experiment.m_levels[-1]}"
            )
        return self

    @property
    def reference_dt_level(self) -> int:
        return self.experiment.reference_dt_level or self.experiment.m_levels[-1] + 4

    @property
    def path_level(self) -> int:
        """Finest Brownian level needed by every run of the experiment."""
        if self.experiment.path_level is not None:
            return self.experiment.path_level
        levels = [
            self.reference_dt_level,
            self.solver.wz_step_level(self.experiment.m_levels[-1]),
            self.solver.m_store,
        ]
        return max(levels)

    def with_overrides(self, seed: int | None = None, n_paths: int | None = None, output_dir: str | None = None) -> ExperimentConfig:
        """Apply CLI flag overrides to the experiment section."""
        update = {}
        if seed is not None:
            update["seed"] = seed
        if n_paths is not None:
            update["n_paths"] = n_paths
        if output_dir is not None:
            update["output_dir"] = output_dir
        if not update:
            return self
        section = ExperimentSection.model_validate({**self.experiment.model_dump(), **update})
        return self.model_copy(update={"experiment": section})

    def config_hash(self) -> str:
        """Truncated SHA-256 of the canonical JSON dump."""
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[: settings.config_hash_length]


def _locate(lines: list[str], loc: tuple[Any, ...]) -> int | None:
    """Line of the key at `loc` inside its TOML section, else the section header."""
    section_path = [str(p) for p in loc if isinstance(p, str)]
    if not section_path:
        return None
    header_line = None
    depth = len(section_path)
    # try the deepest table header first, then shorten
    for cut in range(depth, 0, -1):
        header = "[" + ".".join(section_path[:cut]) + "]"
        for idx, raw in enumerate(lines):
            if raw.strip() == header:
                header_line = idx
                key = section_path[cut] if cut < depth else None
                if key is None:
                    return idx + 1
                pattern = re.compile(rf"^\s*{re.escape(key)}\s*=")
                for j in range(idx + 1, len(lines)):
                    if lines[j].lstrip().startswith("["):
                        break
                    if pattern.match(lines[j]):
                        return j + 1
                return idx + 1
    return header_line + 1 if header_line is not None else None


def load_experiment_config(path: str | Path) -> ExperimentConfig:
    """Parse and validate a TOML experiment file; errors carry `path:line`."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"{path}: cannot read config: {e}")
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        match = re.search(r"line (\d+)", str(e))
        line = int(match.group(1)) if match else None
        raise ConfigurationError(f"{path}:{line or '?'}: {e}", line=line)
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        loc = tuple(first["loc"])
        line = _locate(text.splitlines(), loc)
        where = ".".join(str(p) for p in loc) or "<root>"
        raise ConfigurationError(f"{path}:{line or '?'}: {where}: {first['msg']}", line=line)
