"""Closed-form solutions for linear diagonal drifts driven by diagonal linear noise."""

from __future__ import annotations

from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy import integrate

from core.exceptions import DimensionError
from domain.operators import ControlPath


class LinearDiagonalOracle(BaseModel):
    """dY_k = d_k Y_k dt + Σ_i a_i Y_k dβ_i, solved mode by mode.

    Itô:          Y_k(t) = y0_k exp((d_k − ½Σa²)t + Σ a_i β_i(t))
    Stratonovich: Y_k(t) = y0_k exp(d_k t + Σ a_i β_i(t))
    Skeleton:     Z_k(t) = y0_k exp((d_k − ½Σ_{i≤m} a²)t + Σ a_i ∫_0^t g_i)
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    multipliers: np.ndarray = Field(..., description="Diagonal drift d_k")
    gains: np.ndarray = Field(..., description="Noise gains a_i (empty for zero noise)")

    @field_validator("multipliers", "gains", mode="before")
    @classmethod
    def cast_arrays(cls, v: Any) -> np.ndarray:
        arr = np.atleast_1d(np.array(v, dtype=float, copy=True))
        arr.setflags(write=False)
        return arr

    def _exponent_noise(self, beta_values: np.ndarray) -> np.ndarray:
        if self.gains.size == 0:
            return np.zeros(beta_values.shape[-1])
        if beta_values.shape[0] < self.gains.size:
            raise DimensionError(f"Need {self.gains.size} Brownian modes, got {beta_values.shape[0]}")
        return self.gains @ beta_values[: self.gains.size]

    def ito(self, y0: np.ndarray, times: np.ndarray, beta_values: np.ndarray) -> np.ndarray:
        """Itô solution at `times` given β_i at those times, shape (len(times), n)."""
        half_sq = 0.5 * float(np.sum(self.gains ** 2))
        rate = np.outer(times, self.multipliers - half_sq)
        return y0[None, :] * np.exp(rate + self._exponent_noise(beta_values)[:, None])

    def stratonovich(self, y0: np.ndarray, times: np.ndarray, beta_values: np.ndarray) -> np.ndarray:
        """Limit of the uncorrected Wong–Zakai system."""
        rate = np.outer(times, self.multipliers)
        return y0[None, :] * np.exp(rate + self._exponent_noise(beta_values)[:, None])

    def skeleton(self, y0: np.ndarray, times: np.ndarray, control: ControlPath, m: int) -> np.ndarray:
        """Skeleton Z_g with the ½T̂r_m compensator over the first min(m, d) modes."""
        active = self.gains[: min(m, self.gains.size)]
        half_sq = 0.5 * float(np.sum(active ** 2))
        fine = np.union1d(times, control.times[control.times <= times[-1]])
        g = np.column_stack([np.interp(fine, control.times, control.values[:, j]) for j in range(control.dimension)])
        cumulative = integrate.cumulative_trapezoid(g, fine, axis=0, initial=0.0)
        drive = cumulative[:, : self.gains.size] @ self.gains if self.gains.size else np.zeros(fine.size)
        drive_at = np.interp(times, fine, drive)
        rate = np.outer(times, self.multipliers - half_sq)
        return y0[None, :] * np.exp(rate + drive_at[:, None])
