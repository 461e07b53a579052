"""Solver configuration and the stored trajectory of a Galerkin run."""

from __future__ import annotations

import math
from enum import Enum
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from domain.spaces import CoefState


class Scheme(str, Enum):
    """Time-stepping schemes."""
    EXPLICIT_EULER = "explicit-euler"
    HEUN = "heun"


class SolverConfig(BaseModel):
    """Time-stepping knobs shared by every solver."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    scheme: Scheme = Field(default=Scheme.EXPLICIT_EULER, description="Drift integrator")
    dt_level: int = Field(default=10, ge=1, description="Global step T/2^dt_level")
    substeps_per_varpi: int = Field(default=8, ge=1, description="Minimum WZ steps inside each ϖ interval")
    taming_enabled: bool | None = Field(
        default=None, description="Divide the drift by 1 + dt^power·‖A‖_H; unset follows the drift's superlinear flag"
    )
    taming_power: float = Field(default=1.0, gt=0.0, description="Exponent of dt in the taming divisor")
    max_norm_guard: float = Field(default=math.inf, gt=0.0, description="M_guard of the exit time")
    m_store: int = Field(default=10, ge=0, description="Stored times are kT/2^m_store")
    correction: bool = Field(default=True, description="Include −½T̂r_m in the WZ system")

    @field_validator("substeps_per_varpi")
    @classmethod
    def validate_substeps(cls, v: int) -> int:
        """Substeps are rounded up to a power of two, so reject absurd values early."""
        if v > 2 ** 16:
            raise ValueError("substeps_per_varpi must not exceed 65536")
        return v

    def wz_step_level(self, m: int) -> int:
        """J with 2^J total WZ steps: ϖ/2^{J−m} never exceeds T/2^dt_level and holds ≥ K_sub steps."""
        sub_level = max(self.dt_level - m, math.ceil(math.log2(self.substeps_per_varpi)))
        return m + max(sub_level, 0)

    def tames(self, superlinear: bool) -> bool:
        """Whether the drift is tamed; an unset flag tames exactly the superlinear drifts."""
        return superlinear if self.taming_enabled is None else self.taming_enabled


class Trajectory(BaseModel):
    """Galerkin states at the stored uniform grid plus the exit diagnostics."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    times: np.ndarray = Field(..., description="Stored times, increasing from 0")
    states: np.ndarray = Field(..., description="Coefficients, shape (len(times), n_modes)")
    norms_h: np.ndarray = Field(..., description="‖y(t)‖_H at stored times")
    norms_v: np.ndarray = Field(..., description="‖y(t)‖_V at stored times")
    v_integral: float = Field(default=0.0, ge=0.0, description="∫_0^T ‖y‖^β_V ds on the step grid")
    exited_at: float | None = Field(default=None, description="First grid time past the guard")
    step_level: int = Field(default=0, ge=0, description="log2 of the number of integration steps")
    h_weights: np.ndarray | None = Field(default=None, description="Weights of ‖·‖²_H, unit when omitted")

    @field_validator("times", "states", "norms_h", "norms_v", "h_weights", mode="before")
    @classmethod
    def cast_arrays(cls, v: Any) -> np.ndarray | None:
        """Convert to immutable float arrays."""
        if v is None:
            return None
        arr = np.array(v, dtype=float, copy=True)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def validate_lengths(self) -> Trajectory:
        """times, states and norm caches share one length."""
        n = self.times.shape[0]
        if self.states.ndim != 2 or self.states.shape[0] != n:
            raise ValueError("states must have shape (len(times), n_modes)")
        if self.norms_h.shape != (n,) or self.norms_v.shape != (n,):
            raise ValueError("Norm caches must match the time grid")
        if n == 0 or self.times[0] != 0.0 or np.any(np.diff(self.times) <= 0.0):
            raise ValueError("times must start at 0 and increase")
        return self

    @property
    def n_modes(self) -> int:
        return int(self.states.shape[1])

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    @property
    def exited(self) -> bool:
        return self.exited_at is not None

    def state(self, k: int) -> CoefState:
        return CoefState(coeffs=self.states[k], time=float(self.times[k]))

    def interpolate(self, times: np.ndarray) -> np.ndarray:
        """States at arbitrary times, piecewise linear between stored points."""
        return np.column_stack([np.interp(times, self.times, self.states[:, j]) for j in range(self.n_modes)])

    def sup_norm_h_sq(self) -> float:
        return float(np.max(self.norms_h) ** 2)

    def energy(self) -> float:
        """sup_t ‖y‖²_H + ∫_0^T ‖y‖^β_V dt."""
        return self.sup_norm_h_sq() + self.v_integral

    def norm_h_rows(self, coeffs: np.ndarray) -> np.ndarray:
        """‖·‖_H of each row of a (k, n_modes) coefficient array."""
        weights = self.h_weights if self.h_weights is not None else np.ones(self.n_modes)
        return np.sqrt(np.sum(weights * coeffs ** 2, axis=-1))
