"""Discretized Gelfand triple V ⊂ H ⊂ V* on a spectral basis, plus the P_n and Π_m projections."""

from __future__ import annotations

from enum import Enum
from functools import cached_property
from typing import Any, TypeVar

import numpy as np
from numpy.polynomial import legendre
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.exceptions import DimensionError

DUALITY_RTOL = 1e-12


class BasisKind(str, Enum):
    """Spectral basis families."""
    SINE_DIRICHLET = "sine-dirichlet"
    FOURIER_PERIODIC = "fourier-periodic"
    SCALAR = "scalar"


class VNormKind(str, Enum):
    """How ‖·‖_V is evaluated."""
    WEIGHTED = "weighted"          # (Σ v_k x_k²)^{1/2}
    GRADIENT_LP = "gradient-lp"    # (∫|∂_x y|^β dx)^{1/β} by quadrature
    VALUE_LP = "value-lp"          # (∫|y|^β dx)^{1/β} by quadrature


def _as_coeff_array(v: Any) -> np.ndarray:
    arr = np.array(v, dtype=float, copy=True)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ValueError("Coefficient arrays must be one-dimensional")
    arr.setflags(write=False)
    return arr


class CoefState(BaseModel):
    """Coordinates of an H_n element in the basis {φ_k} at a given time."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    coeffs: np.ndarray = Field(..., description="Basis coordinates, length n_modes")
    time: float = Field(default=0.0, ge=0.0, description="Time stamp in [0, T]")

    @field_validator("coeffs", mode="before")
    @classmethod
    def cast_coeffs(cls, v: Any) -> np.ndarray:
        """Convert to an immutable float array."""
        return _as_coeff_array(v)

    @field_validator("coeffs")
    @classmethod
    def validate_finite(cls, v: np.ndarray) -> np.ndarray:
        """All entries must be finite."""
        if v.size == 0:
            raise ValueError("Coefficient array cannot be empty")
        if not np.all(np.isfinite(v)):
            raise ValueError("Coefficients must be finite")
        return v

    @property
    def n_modes(self) -> int:
        return int(self.coeffs.shape[0])


class GalerkinSpace(BaseModel):
    """Finite-dimensional surrogate of the Gelfand triple.

    Norms are weighted sums over coefficients. Nonquadratic V norms
    (p-Laplacian, porous media) are evaluated by composite Gauss–Legendre
    quadrature of the basis representation.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n_modes: int = Field(..., gt=0, description="Galerkin dimension n")
    basis_kind: BasisKind = Field(..., description="Spectral basis family")
    domain_length: float = Field(default=1.0, gt=0.0, description="Spatial interval length")
    h_weights: np.ndarray = Field(..., description="Per-mode weights of ‖·‖²_H")
    v_weights: np.ndarray = Field(..., description="Per-mode weights of ‖·‖²_V (quadratic part)")
    vstar_weights: np.ndarray = Field(..., description="Per-mode weights of ‖·‖²_V*")
    v_exponent: float = Field(default=2.0, gt=1.0, description="β, the V-norm power used in coercivity")
    v_norm: VNormKind = Field(default=VNormKind.WEIGHTED, description="V-norm evaluator")
    quad_panels: int = Field(default=4, gt=0, description="Gauss–Legendre panels")
    quad_nodes_per_panel: int | None = Field(default=None, description="Nodes per panel (default 2·n_modes per panel)")

    @field_validator("h_weights", "v_weights", "vstar_weights", mode="before")
    @classmethod
    def cast_weights(cls, v: Any) -> np.ndarray:
        """Convert weight tables to immutable float arrays."""
        return _as_coeff_array(v)

    @model_validator(mode="after")
    def validate_triple(self) -> GalerkinSpace:
        """Check weight shapes, positivity, embedding and duality consistency."""
        for name in ("h_weights", "v_weights", "vstar_weights"):
            w = getattr(self, name)
            if w.shape != (self.n_modes,):
                raise ValueError(f"{name} must have length n_modes={self.n_modes}, got {w.shape[0]}")
            if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
                raise ValueError(f"{name} must be finite and strictly positive")
        if np.min(self.v_weights / self.h_weights) <= 0.0:
            raise ValueError("Embedding V ↪ H requires v_weights ≥ c·h_weights with c > 0")
        if self.v_norm is VNormKind.WEIGHTED:
            if self.v_exponent != 2.0:
                raise ValueError("Weighted V norms are quadratic; v_exponent must be 2")
            expected = self.h_weights ** 2 / self.v_weights
            if not np.allclose(self.vstar_weights, expected, rtol=DUALITY_RTOL, atol=0.0):
                raise ValueError("vstar_weights must equal h_weights² / v_weights for quadratic triples")
        if self.basis_kind is BasisKind.SCALAR and self.n_modes != 1:
            raise ValueError("Scalar spaces have exactly one mode")
        if self.basis_kind is BasisKind.SCALAR and self.v_norm is not VNormKind.WEIGHTED:
            raise ValueError("Scalar spaces only support weighted V norms")
        return self

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------
    @classmethod
    def scalar(cls) -> GalerkinSpace:
        """One-mode space with unit weights, used for SDE sanity models."""
        ones = np.ones(1)
        return cls(n_modes=1, basis_kind=BasisKind.SCALAR, h_weights=ones, v_weights=ones, vstar_weights=ones)

    @classmethod
    def sine_dirichlet(
        cls,
        n_modes: int,
        domain_length: float = 1.0,
        *,
        h_power: float = 0.0,
        v_norm: VNormKind = VNormKind.WEIGHTED,
        v_exponent: float = 2.0,
    ) -> GalerkinSpace:
        """Sine basis φ_k = √(2/L) sin(kπx/L); h_weights = (kπ/L)^{h_power}.

        h_power = 0 gives H = L², h_power = -2 gives H = H^{-1}. The quadratic
        V weights are (kπ/L)^{h_power+2}, one derivative above H.
        """
        k = np.arange(1, n_modes + 1, dtype=float) * np.pi / domain_length
        h = k ** h_power
        v = k ** (h_power + 2.0)
        return cls(
            n_modes=n_modes,
            basis_kind=BasisKind.SINE_DIRICHLET,
            domain_length=domain_length,
            h_weights=h,
            v_weights=v,
            vstar_weights=h ** 2 / v,
            v_exponent=v_exponent,
            v_norm=v_norm,
        )

    @classmethod
    def fourier_periodic(cls, n_modes: int, domain_length: float = 1.0) -> GalerkinSpace:
        """Real trigonometric basis 1/√L, √(2/L)cos, √(2/L)sin with the full H¹ norm on V."""
        j = _fourier_frequencies(n_modes) * 2.0 * np.pi / domain_length
        h = np.ones(n_modes)
        v = 1.0 + j ** 2
        return cls(
            n_modes=n_modes,
            basis_kind=BasisKind.FOURIER_PERIODIC,
            domain_length=domain_length,
            h_weights=h,
            v_weights=v,
            vstar_weights=h ** 2 / v,
        )

    # ------------------------------------------------------------------
    # Basis metadata and quadrature
    # ------------------------------------------------------------------
    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumber of each basis function (kπ/L or 2πj/L; 0 for scalar)."""
        if self.basis_kind is BasisKind.SINE_DIRICHLET:
            return np.arange(1, self.n_modes + 1, dtype=float) * np.pi / self.domain_length
        if self.basis_kind is BasisKind.FOURIER_PERIODIC:
            return _fourier_frequencies(self.n_modes) * 2.0 * np.pi / self.domain_length
        return np.zeros(1)

    @cached_property
    def quadrature(self) -> tuple[np.ndarray, np.ndarray]:
        """Composite Gauss–Legendre nodes and weights on [0, L]."""
        per_panel = self.quad_nodes_per_panel or 2 * self.n_modes
        ref_nodes, ref_weights = legendre.leggauss(per_panel)
        width = self.domain_length / self.quad_panels
        left = np.arange(self.quad_panels) * width
        nodes = (left[:, None] + 0.5 * width * (ref_nodes[None, :] + 1.0)).ravel()
        weights = np.tile(0.5 * width * ref_weights, self.quad_panels)
        return nodes, weights

    @cached_property
    def basis_values(self) -> np.ndarray:
        """φ_k at the quadrature nodes, shape (M, n)."""
        nodes, _ = self.quadrature
        return self._basis_matrix(nodes, derivative=False)

    @cached_property
    def basis_derivatives(self) -> np.ndarray:
        """∂_x φ_k at the quadrature nodes, shape (M, n)."""
        nodes, _ = self.quadrature
        return self._basis_matrix(nodes, derivative=True)

    def _basis_matrix(self, x: np.ndarray, derivative: bool) -> np.ndarray:
        L = self.domain_length
        k = self.wavenumbers
        phase = np.outer(x, k)
        if self.basis_kind is BasisKind.SINE_DIRICHLET:
            scale = np.sqrt(2.0 / L)
            return scale * k * np.cos(phase) if derivative else scale * np.sin(phase)
        if self.basis_kind is BasisKind.FOURIER_PERIODIC:
            out = np.empty_like(phase)
            scale = np.sqrt(2.0 / L)
            idx = np.arange(self.n_modes)
            is_cos = (idx % 2 == 1)
            is_sin = (idx % 2 == 0) & (idx > 0)
            if derivative:
                out[:, 0] = 0.0
                out[:, is_cos] = -scale * k[is_cos] * np.sin(phase[:, is_cos])
                out[:, is_sin] = scale * k[is_sin] * np.cos(phase[:, is_sin])
            else:
                out[:, 0] = 1.0 / np.sqrt(L)
                out[:, is_cos] = scale * np.cos(phase[:, is_cos])
                out[:, is_sin] = scale * np.sin(phase[:, is_sin])
            return out
        return np.zeros((x.shape[0], 1)) if derivative else np.ones((x.shape[0], 1))

    def evaluate(self, coeffs: np.ndarray, x: np.ndarray | None = None) -> np.ndarray:
        """Point values of Σ c_k φ_k at x (quadrature nodes by default)."""
        self.check_dimension(coeffs)
        if x is None:
            return self.basis_values @ coeffs
        return self._basis_matrix(np.asarray(x, dtype=float), derivative=False) @ coeffs

    def evaluate_derivative(self, coeffs: np.ndarray) -> np.ndarray:
        """∂_x of Σ c_k φ_k at the quadrature nodes."""
        self.check_dimension(coeffs)
        return self.basis_derivatives @ coeffs

    def integrate(self, values: np.ndarray) -> float:
        """∫_0^L of nodal values."""
        _, weights = self.quadrature
        return float(weights @ values)

    # ------------------------------------------------------------------
    # Norms and pairings
    # ------------------------------------------------------------------
    def check_dimension(self, coeffs: np.ndarray) -> None:
        if coeffs.shape[-1] != self.n_modes:
            raise DimensionError(
                f"Coefficient length {coeffs.shape[-1]} does not match n_modes={self.n_modes}"
            )

    def inner_h(self, x: np.ndarray, y: np.ndarray) -> float:
        """H inner product (x, y)."""
        self.check_dimension(x)
        self.check_dimension(y)
        return float(np.sum(self.h_weights * x * y))

    def pairing(self, x: np.ndarray, y: np.ndarray) -> float:
        """Duality bracket ⟨x, y⟩; coincides with (x, y) on H × V."""
        return self.inner_h(x, y)

    def norm_h(self, x: np.ndarray) -> float:
        self.check_dimension(x)
        return float(np.sqrt(np.sum(self.h_weights * x * x)))

    def norm_vstar(self, x: np.ndarray) -> float:
        self.check_dimension(x)
        return float(np.sqrt(np.sum(self.vstar_weights * x * x)))

    def norm_v(self, x: np.ndarray) -> float:
        self.check_dimension(x)
        if self.v_norm is VNormKind.WEIGHTED:
            return float(np.sqrt(np.sum(self.v_weights * x * x)))
        p = self.v_exponent
        values = self.evaluate_derivative(x) if self.v_norm is VNormKind.GRADIENT_LP else self.evaluate(x)
        return float(self.integrate(np.abs(values) ** p) ** (1.0 / p))


def _fourier_frequencies(n_modes: int) -> np.ndarray:
    idx = np.arange(n_modes)
    return ((idx + 1) // 2).astype(float)


def _coeffs_of(x: CoefState | np.ndarray) -> np.ndarray:
    if isinstance(x, CoefState):
        return x.coeffs
    return np.asarray(x, dtype=float)


StateT = TypeVar("StateT", CoefState, np.ndarray)


def project_pn(x: StateT, n: int) -> StateT:
    """P_n: keep the first n coordinates of x."""
    coeffs = _coeffs_of(x)
    if n <= 0 or n > coeffs.shape[-1]:
        raise DimensionError(f"Projection size {n} outside 1..{coeffs.shape[-1]}")
    truncated = np.array(coeffs[..., :n], dtype=float)
    if isinstance(x, CoefState):
        return CoefState(coeffs=truncated, time=x.time)
    return truncated


def project_pim(u: np.ndarray, m: int) -> np.ndarray:
    """Π_m: orthogonal projection of a noise-coefficient sequence onto span{e_1, …, e_m}."""
    coeffs = np.asarray(u, dtype=float)
    if m <= 0 or m > coeffs.shape[-1]:
        raise DimensionError(f"Noise projection size {m} outside 1..{coeffs.shape[-1]}")
    return np.array(coeffs[..., :m], dtype=float)


def norm_h(space: GalerkinSpace, x: CoefState | np.ndarray) -> float:
    return space.norm_h(_coeffs_of(x))


def norm_v(space: GalerkinSpace, x: CoefState | np.ndarray) -> float:
    return space.norm_v(_coeffs_of(x))


def norm_vstar(space: GalerkinSpace, x: CoefState | np.ndarray) -> float:
    return space.norm_vstar(_coeffs_of(x))
