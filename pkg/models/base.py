"""ModelSpec: one (space, drift, noise, initial state) instance of the model zoo."""

from __future__ import annotations

from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from domain.operators import DriftOperator, NoiseOperator, ZeroNoise
from domain.spaces import CoefState, GalerkinSpace
from models.noise_specs import DiagonalLinearNoise
from models.oracles import LinearDiagonalOracle


class ModelSpec(BaseModel):
    """A concrete SPDE (or SDE) together with its declared hypothesis data."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    name: str = Field(..., description="Registry name")
    space: GalerkinSpace
    drift: DriftOperator
    noise: NoiseOperator
    initial_state: CoefState
    analytic_oracle: LinearDiagonalOracle | None = Field(default=None, description="Closed form when available")
    params: dict[str, Any] = Field(default_factory=dict, description="Parameters the model was built with")

    @model_validator(mode="after")
    def validate_consistency(self) -> ModelSpec:
        """β, operator spaces and initial state must agree."""
        if self.drift.constants.beta != self.space.v_exponent:
            raise ValueError(
                f"Drift β={self.drift.constants.beta} differs from space v_exponent={self.space.v_exponent}"
            )
        if self.initial_state.n_modes != self.space.n_modes:
            raise ValueError("Initial state dimension does not match the space")
        if self.drift.space.n_modes != self.space.n_modes or self.noise.space.n_modes != self.space.n_modes:
            raise ValueError("Drift and noise must act on the model space")
        return self

    @property
    def beta(self) -> float:
        return self.drift.constants.beta

    @property
    def y0(self) -> np.ndarray:
        return np.array(self.initial_state.coeffs)

    def with_noise(self, noise: NoiseOperator, oracle: LinearDiagonalOracle | None = None) -> ModelSpec:
        """Same model driven by a different noise."""
        return self.model_copy(update={"noise": noise, "analytic_oracle": oracle})


def decaying_profile(space: GalerkinSpace, amplitude: float) -> np.ndarray:
    """Default initial coefficients amplitude/j², j = 1..n."""
    j = np.arange(1, space.n_modes + 1, dtype=float)
    return amplitude / j ** 2


def oracle_for(multipliers: np.ndarray, noise: NoiseOperator) -> LinearDiagonalOracle | None:
    """Closed form for a linear diagonal drift when the noise is zero or diagonal linear."""
    if isinstance(noise, ZeroNoise):
        return LinearDiagonalOracle(multipliers=multipliers, gains=np.zeros(0))
    if isinstance(noise, DiagonalLinearNoise):
        return LinearDiagonalOracle(multipliers=multipliers, gains=noise.a)
    return None
