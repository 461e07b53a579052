"""Drift and noise operator interfaces, the correction term T̂r_m and the controlled-system bundle."""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any, Callable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import integrate

from core.exceptions import DimensionError, ModeIndexError
from domain.spaces import GalerkinSpace


class DriftConstants(BaseModel):
    """Declared monotonicity and coercivity constants of a drift A."""

    model_config = ConfigDict(frozen=True)

    l_a: float = Field(..., gt=0.0, description="Coercivity constant L_A")
    beta: float = Field(..., gt=1.0, description="V-norm exponent β")
    alpha: float = Field(default=0.0, ge=0.0, description="H-power α in the growth bound")
    zeta: float = Field(default=0.0, ge=0.0, description="H-power ζ in the ρ, η, κ, ϰ bounds")
    c: float = Field(default=0.0, ge=0.0, description="Constant C of the growth bounds")


class NoiseConstants(BaseModel):
    """Declared growth and correction-term constants of a noise σ."""

    model_config = ConfigDict(frozen=True)

    k: float = Field(default=0.0, ge=0.0, description="K in ‖σ(x)‖²_{L2} ≤ K(1 + ‖x‖²_H)")
    l: float = Field(default=0.0, ge=0.0, description="L in ‖T̂r_m(x)‖²_H ≤ L(1 + ‖x‖²_H)")
    c: float = Field(default=0.0, ge=0.0, description="C in |κ| + |ϰ| ≤ C(1 + ‖x‖^ζ_H)")
    zeta: float = Field(default=0.0, ge=0.0, description="ζ in the κ, ϰ bound")


class DriftOperator(ABC):
    """A(t, ·): Galerkin-projected drift with its declared constants."""

    # superlinear drifts are tamed unless the solver config says otherwise
    superlinear: bool = False

    def __init__(self, space: GalerkinSpace, constants: DriftConstants) -> None:
        self.space = space
        self.constants = constants

    @abstractmethod
    def eval(self, t: float, y: np.ndarray) -> np.ndarray:
        """Coefficients of P_n A(t, y) in the pairing representation."""
        pass

    def f_profile(self, t: float) -> float:
        """Integrable f(t) ≥ 0 of the local monotonicity and coercivity bounds."""
        return 0.0

    def rho(self, y: np.ndarray) -> float:
        return 0.0

    def eta(self, y: np.ndarray) -> float:
        return 0.0

    def dual_action(self, t: float, y: np.ndarray, z: np.ndarray) -> float:
        """⟨A(t, y), z⟩."""
        return self.space.pairing(self.eval(t, y), z)

    def dual_norm(self, t: float, y: np.ndarray) -> float:
        """‖A(t, y)‖_{V*}."""
        return self.space.norm_vstar(self.eval(t, y))


class NoiseOperator(ABC):
    """σ with columns σ_i(x) = σ(x)e_i, i = 1..n_noise_modes, and their Fréchet derivatives."""

    def __init__(self, space: GalerkinSpace, n_noise_modes: int, constants: NoiseConstants) -> None:
        if n_noise_modes < 1:
            raise DimensionError("Noise operators need at least one mode")
        self.space = space
        self.n_noise_modes = n_noise_modes
        self.constants = constants

    @abstractmethod
    def sigma_i(self, y: np.ndarray, i: int) -> np.ndarray:
        pass

    @abstractmethod
    def d_sigma_i(self, y: np.ndarray, i: int, v: np.ndarray) -> np.ndarray:
        """Dσ_i(y)v."""
        pass

    @abstractmethod
    def d2_sigma_i(self, y: np.ndarray, i: int, v: np.ndarray, w: np.ndarray) -> np.ndarray:
        """D²σ_i(y)(v, w)."""
        pass

    def kappa(self, y: np.ndarray) -> float:
        return 0.0

    def varkappa(self, y: np.ndarray) -> float:
        return 0.0

    def h6_bound(self, radius: float) -> float:
        """Declared bound C_M on Dσ_i and D²σ_i for ‖x‖_H ≤ radius."""
        return float("inf")

    def check_mode(self, i: int) -> None:
        if i < 1 or i > self.n_noise_modes:
            raise ModeIndexError(f"Noise mode {i} outside 1..{self.n_noise_modes}")

    def check_noise_vector(self, u: np.ndarray) -> None:
        if u.shape[-1] != self.n_noise_modes:
            raise DimensionError(f"Noise vector length {u.shape[-1]} != {self.n_noise_modes}")

    def apply(self, y: np.ndarray, u: np.ndarray) -> np.ndarray:
        """σ(y)u = Σ_i σ_i(y) u_i."""
        self.check_noise_vector(u)
        out = np.zeros(self.space.n_modes)
        for i in range(1, self.n_noise_modes + 1):
            if u[i - 1] != 0.0:
                out += self.sigma_i(y, i) * u[i - 1]
        return out

    def hilbert_schmidt_sq(self, y: np.ndarray) -> float:
        """‖σ(y)‖²_{L2} = Σ_i ‖σ_i(y)‖²_H."""
        return float(sum(self.space.norm_h(self.sigma_i(y, i)) ** 2 for i in range(1, self.n_noise_modes + 1)))

    def jacobian(self, y: np.ndarray, i: int) -> np.ndarray:
        """Matrix of Dσ_i(y) in coefficients, columns are Dσ_i(y)e_k."""
        n = self.space.n_modes
        eye = np.eye(n)
        return np.column_stack([self.d_sigma_i(y, i, eye[:, k]) for k in range(n)])


class ZeroNoise(NoiseOperator):
    """σ ≡ 0."""

    def __init__(self, space: GalerkinSpace, n_noise_modes: int = 1) -> None:
        super().__init__(space, n_noise_modes, NoiseConstants())

    def sigma_i(self, y: np.ndarray, i: int) -> np.ndarray:
        self.check_mode(i)
        return np.zeros(self.space.n_modes)

    def d_sigma_i(self, y: np.ndarray, i: int, v: np.ndarray) -> np.ndarray:
        self.check_mode(i)
        return np.zeros(self.space.n_modes)

    def d2_sigma_i(self, y: np.ndarray, i: int, v: np.ndarray, w: np.ndarray) -> np.ndarray:
        self.check_mode(i)
        return np.zeros(self.space.n_modes)

    def apply(self, y: np.ndarray, u: np.ndarray) -> np.ndarray:
        return np.zeros(self.space.n_modes)

    def h6_bound(self, radius: float) -> float:
        return 0.0


class ScaledNoise(NoiseOperator):
    """c·σ; c = −1 realizes the −σẆ^m dt term of the Z_g^m system."""

    def __init__(self, base: NoiseOperator, factor: float) -> None:
        constants = NoiseConstants(
            k=factor ** 2 * base.constants.k,
            l=factor ** 4 * base.constants.l,
            c=factor ** 2 * base.constants.c,
            zeta=base.constants.zeta,
        )
        super().__init__(base.space, base.n_noise_modes, constants)
        self.base = base
        self.factor = factor

    def sigma_i(self, y: np.ndarray, i: int) -> np.ndarray:
        return self.factor * self.base.sigma_i(y, i)

    def d_sigma_i(self, y: np.ndarray, i: int, v: np.ndarray) -> np.ndarray:
        return self.factor * self.base.d_sigma_i(y, i, v)

    def d2_sigma_i(self, y: np.ndarray, i: int, v: np.ndarray, w: np.ndarray) -> np.ndarray:
        return self.factor * self.base.d2_sigma_i(y, i, v, w)

    def apply(self, y: np.ndarray, u: np.ndarray) -> np.ndarray:
        return self.factor * self.base.apply(y, u)

    def kappa(self, y: np.ndarray) -> float:
        return self.factor ** 2 * self.base.kappa(y)

    def varkappa(self, y: np.ndarray) -> float:
        return self.factor ** 2 * self.base.varkappa(y)

    def h6_bound(self, radius: float) -> float:
        return abs(self.factor) * self.base.h6_bound(radius)


def correction_tr(noise: NoiseOperator, m: int, y: np.ndarray) -> np.ndarray:
    """T̂r_m(y) = Σ_{i ≤ min(m, d)} Dσ_i(y)σ_i(y)."""
    if m < 1:
        raise ModeIndexError(f"Correction level m must be positive, got {m}")
    out = np.zeros(noise.space.n_modes)
    for i in range(1, min(m, noise.n_noise_modes) + 1):
        out += noise.d_sigma_i(y, i, noise.sigma_i(y, i))
    return out


class StateMap(ABC):
    """G: H → H with a declared bound ‖G(x)‖²_H ≤ bound·(1 + ‖x‖²_H)."""

    bound: float = 0.0

    @abstractmethod
    def __call__(self, y: np.ndarray) -> np.ndarray:
        pass


class ZeroMap(StateMap):
    def __init__(self, space: GalerkinSpace) -> None:
        self.space = space
        self.bound = 0.0

    def __call__(self, y: np.ndarray) -> np.ndarray:
        return np.zeros(self.space.n_modes)


class CorrectionMap(StateMap):
    """factor·T̂r_m; factor = ½ gives the Itô–Stratonovich compensator of the WZ system."""

    def __init__(self, noise: NoiseOperator, m: int, factor: float = 0.5) -> None:
        self.noise = noise
        self.m = m
        self.factor = factor
        self.bound = factor ** 2 * noise.constants.l

    def __call__(self, y: np.ndarray) -> np.ndarray:
        return self.factor * correction_tr(self.noise, self.m, y)


class ControlPath(BaseModel):
    """Tabulated control g: [0, T] → U, linear between nodes."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    times: np.ndarray = Field(..., description="Increasing nodes covering [0, T]")
    values: np.ndarray = Field(..., description="g at the nodes, shape (len(times), d)")

    @field_validator("times", "values", mode="before")
    @classmethod
    def cast_arrays(cls, v: Any) -> np.ndarray:
        """Convert to immutable float arrays."""
        arr = np.array(v, dtype=float, copy=True)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def validate_table(self) -> ControlPath:
        """Nodes increase, values match, everything finite."""
        if self.times.ndim != 1 or self.times.size < 2:
            raise ValueError("Control needs at least two time nodes")
        if np.any(np.diff(self.times) <= 0.0) or self.times[0] != 0.0:
            raise ValueError("Control nodes must start at 0 and increase strictly")
        if self.values.ndim != 2 or self.values.shape[0] != self.times.size:
            raise ValueError("Control values must have shape (len(times), d)")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("Control values must be finite")
        return self

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def dimension(self) -> int:
        return int(self.values.shape[1])

    @classmethod
    def constant(cls, value: list[float] | np.ndarray, T: float) -> ControlPath:
        vec = np.atleast_1d(np.asarray(value, dtype=float))
        return cls(times=np.array([0.0, T]), values=np.vstack([vec, vec]))

    @classmethod
    def zero(cls, dimension: int, T: float) -> ControlPath:
        return cls.constant(np.zeros(dimension), T)

    @classmethod
    def from_function(cls, fn: Callable[[float], np.ndarray], T: float, n_points: int = 1025) -> ControlPath:
        times = np.linspace(0.0, T, n_points)
        values = np.vstack([np.atleast_1d(np.asarray(fn(float(t)), dtype=float)) for t in times])
        return cls(times=times, values=values)

    def __call__(self, t: float) -> np.ndarray:
        return np.array([np.interp(t, self.times, self.values[:, j]) for j in range(self.dimension)])

    def l2_norm_sq(self) -> float:
        """∫_0^T ‖g‖²_U dt by the trapezoid rule on the nodes."""
        sq = np.sum(self.values ** 2, axis=1)
        return float(integrate.trapezoid(sq, self.times))


class ControlledBundle(BaseModel):
    """Coefficients (σ₁, σ₂, σ₃, G, g) of the general controlled system."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    sigma1: NoiseOperator
    sigma2: NoiseOperator
    sigma3: NoiseOperator
    control: ControlPath
    G: StateMap

    @model_validator(mode="after")
    def validate_dimensions(self) -> ControlledBundle:
        """All noise operators act on one space with one noise dimension matching g."""
        dims = {op.space.n_modes for op in (self.sigma1, self.sigma2, self.sigma3)}
        modes = {op.n_noise_modes for op in (self.sigma1, self.sigma2, self.sigma3)}
        if len(dims) != 1:
            raise ValueError("σ₁, σ₂, σ₃ must act on the same Galerkin space")
        if len(modes) != 1:
            raise ValueError("σ₁, σ₂, σ₃ must share the noise dimension")
        if self.control.dimension != self.sigma3.n_noise_modes:
            raise ValueError(
                f"Control dimension {self.control.dimension} != noise modes {self.sigma3.n_noise_modes}"
            )
        if not np.isfinite(self.control.l2_norm_sq()):
            raise ValueError("Control must have finite L²(0, T; U) norm")
        return self
