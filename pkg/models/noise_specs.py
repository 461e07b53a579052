"""Shipped noise families: additive, diagonal linear and modewise tanh."""

from __future__ import annotations

from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from core.exceptions import DimensionError
from domain.operators import NoiseConstants, NoiseOperator, ZeroNoise
from domain.spaces import GalerkinSpace

# max over t of sech⁴(t)·tanh²(t), attained at tanh² = 1/3
_SECH4_TANH2_MAX = 4.0 / 27.0
# max over t of 2·sech²(t)·|tanh(t)|
_TWO_SECH2_TANH_MAX = 4.0 / (3.0 * np.sqrt(3.0))


class NoiseKind(str, Enum):
    """Noise families selectable from a config file."""
    ZERO = "zero"
    ADDITIVE = "additive"
    LINEAR = "linear"
    TANH = "tanh"


class NoiseSpec(BaseModel):
    """Noise family plus its per-mode coefficients."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: NoiseKind = Field(default=NoiseKind.ZERO, description="Noise family")
    coefficients: list[float] = Field(default_factory=list, description="b_i or a_i, one per noise mode")
    n_noise_modes: int | None = Field(default=None, ge=1, description="Mode count for zero noise")

    @field_validator("coefficients")
    @classmethod
    def validate_coefficients(cls, v: list[float]) -> list[float]:
        """Coefficients must be finite."""
        if not all(np.isfinite(v)):
            raise ValueError("Noise coefficients must be finite")
        return v


class AdditiveNoise(NoiseOperator):
    """σ_i = b_i φ_i, independent of the state."""

    def __init__(self, space: GalerkinSpace, b: np.ndarray) -> None:
        b = np.asarray(b, dtype=float)
        if b.size > space.n_modes:
            raise DimensionError(f"{b.size} additive modes exceed Galerkin dimension {space.n_modes}")
        h = space.h_weights[: b.size]
        super().__init__(space, b.size, NoiseConstants(k=float(np.sum(b ** 2 * h))))
        self.b = b

    def sigma_i(self, y: np.ndarray, i: int) -> np.ndarray:
        self.check_mode(i)
        out = np.zeros(self.space.n_modes)
        out[i - 1] = self.b[i - 1]
        return out

    def d_sigma_i(self, y: np.ndarray, i: int, v: np.ndarray) -> np.ndarray:
        self.check_mode(i)
        return np.zeros(self.space.n_modes)

    def d2_sigma_i(self, y: np.ndarray, i: int, v: np.ndarray, w: np.ndarray) -> np.ndarray:
        self.check_mode(i)
        return np.zeros(self.space.n_modes)

    def apply(self, y: np.ndarray, u: np.ndarray) -> np.ndarray:
        self.check_noise_vector(u)
        out = np.zeros(self.space.n_modes)
        out[: self.n_noise_modes] = self.b * u
        return out

    def h6_bound(self, radius: float) -> float:
        return float(np.max(np.abs(self.b) * np.sqrt(self.space.h_weights[: self.n_noise_modes])))


class DiagonalLinearNoise(NoiseOperator):
    """σ_i(y) = a_i·y.

    κ = ϰ = ½Σa_i² covers both the Lipschitz bound of σ and the one-sided
    bound of T̂r_m = (Σ_{i≤m} a_i²)·y.
    """

    def __init__(self, space: GalerkinSpace, a: np.ndarray) -> None:
        a = np.asarray(a, dtype=float)
        s = float(np.sum(a ** 2))
        super().__init__(space, a.size, NoiseConstants(k=s, l=s ** 2, c=s))
        self.a = a

    def sigma_i(self, y: np.ndarray, i: int) -> np.ndarray:
        self.check_mode(i)
        return self.a[i - 1] * y

    def d_sigma_i(self, y: np.ndarray, i: int, v: np.ndarray) -> np.ndarray:
        self.check_mode(i)
        return self.a[i - 1] * v

    def d2_sigma_i(self, y: np.ndarray, i: int, v: np.ndarray, w: np.ndarray) -> np.ndarray:
        self.check_mode(i)
        return np.zeros(self.space.n_modes)

    def apply(self, y: np.ndarray, u: np.ndarray) -> np.ndarray:
        self.check_noise_vector(u)
        return float(self.a @ u) * y

    def kappa(self, y: np.ndarray) -> float:
        return 0.5 * float(np.sum(self.a ** 2))

    def varkappa(self, y: np.ndarray) -> float:
        return 0.5 * float(np.sum(self.a ** 2))

    def h6_bound(self, radius: float) -> float:
        return float(np.max(np.abs(self.a))) * max(1.0, radius)


class TanhModewiseNoise(NoiseOperator):
    """σ_i(y) = b_i·tanh(y_i)·φ_i, bounded with nonzero second derivative."""

    def __init__(self, space: GalerkinSpace, b: np.ndarray) -> None:
        b = np.asarray(b, dtype=float)
        if b.size > space.n_modes:
            raise DimensionError(f"{b.size} tanh modes exceed Galerkin dimension {space.n_modes}")
        h = space.h_weights[: b.size]
        b2max = float(np.max(b ** 2)) if b.size else 0.0
        constants = NoiseConstants(
            k=float(np.sum(b ** 2 * h)),
            l=_SECH4_TANH2_MAX * float(np.sum(b ** 4 * h)),
            c=b2max,
        )
        super().__init__(space, b.size, constants)
        self.b = b

    def sigma_i(self, y: np.ndarray, i: int) -> np.ndarray:
        self.check_mode(i)
        out = np.zeros(self.space.n_modes)
        out[i - 1] = self.b[i - 1] * np.tanh(y[i - 1])
        return out

    def d_sigma_i(self, y: np.ndarray, i: int, v: np.ndarray) -> np.ndarray:
        self.check_mode(i)
        out = np.zeros(self.space.n_modes)
        out[i - 1] = self.b[i - 1] / np.cosh(y[i - 1]) ** 2 * v[i - 1]
        return out

    def d2_sigma_i(self, y: np.ndarray, i: int, v: np.ndarray, w: np.ndarray) -> np.ndarray:
        self.check_mode(i)
        out = np.zeros(self.space.n_modes)
        yi = y[i - 1]
        out[i - 1] = -2.0 * self.b[i - 1] * np.tanh(yi) / np.cosh(yi) ** 2 * v[i - 1] * w[i - 1]
        return out

    def apply(self, y: np.ndarray, u: np.ndarray) -> np.ndarray:
        self.check_noise_vector(u)
        out = np.zeros(self.space.n_modes)
        d = self.n_noise_modes
        out[:d] = self.b * np.tanh(y[:d]) * u
        return out

    def kappa(self, y: np.ndarray) -> float:
        return 0.5 * self.constants.c

    def varkappa(self, y: np.ndarray) -> float:
        return 0.5 * self.constants.c

    def h6_bound(self, radius: float) -> float:
        # rank-one diagonal maps; the V-norm of a single-mode projection loses at most 4/π
        h = self.space.h_weights[: self.n_noise_modes]
        scale = np.maximum.reduce([np.ones_like(h), np.sqrt(h), _TWO_SECH2_TANH_MAX / np.sqrt(h)])
        return 2.0 * float(np.max(np.abs(self.b) * scale))


def build_noise(space: GalerkinSpace, spec: NoiseSpec) -> NoiseOperator:
    """Instantiate a NoiseSpec on a Galerkin space."""
    coeffs = np.asarray(spec.coefficients, dtype=float)
    if spec.kind is NoiseKind.ZERO:
        return ZeroNoise(space, spec.n_noise_modes or max(len(spec.coefficients), 1))
    if coeffs.size == 0:
        raise DimensionError(f"Noise kind '{spec.kind.value}' needs at least one coefficient")
    if spec.kind is NoiseKind.ADDITIVE:
        return AdditiveNoise(space, coeffs)
    if spec.kind is NoiseKind.LINEAR:
        return DiagonalLinearNoise(space, coeffs)
    return TanhModewiseNoise(space, coeffs)
