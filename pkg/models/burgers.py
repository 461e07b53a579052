"""Viscous Burgers equation y_t = νy_xx − y y_x on (0, L) with Dirichlet walls."""

from typing import Sequence

import numpy as np
from scipy import fft

from core.exceptions import ArgumentError, QuadratureError
from domain.operators import DriftConstants, DriftOperator
from domain.spaces import CoefState, GalerkinSpace
from models.base import ModelSpec, decaying_profile
from models.noise_specs import NoiseSpec, build_noise


class BurgersDrift(DriftOperator):
    """A(y) = νΔy − P_n(y∂_x y) on the orthonormal sine basis.

    y is sampled on the interior of a uniform grid with N intervals by a
    DST-I, squared, and (y²)_x is projected back with a DCT-I. The trapezoid
    rule is exact for the resulting trigonometric products whenever
    3n < 2N, which is the 2/3 rule; the default N = 2n satisfies it, so
    ⟨B(y), y⟩ = 0 holds to roundoff.

    Local monotonicity: 2⟨A(x₁) − A(x₂), x₁ − x₂⟩ ≤ η(x₂)‖x₁ − x₂‖²_H with
    η(x) = ¾(8ν)^{-1/3}‖x‖_V^{4/3} (Agmon on ‖·‖_{L⁴}, then Young).
    Growth: ‖A(x)‖²_{V*} ≤ max(2ν², L/2π)‖x‖²_V(1 + ‖x‖²_H).
    """

    superlinear = True

    def __init__(self, space: GalerkinSpace, nu: float, grid_intervals: int | None = None) -> None:
        if nu <= 0.0:
            raise ArgumentError(f"Viscosity must be positive, got {nu}")
        n = space.n_modes
        N = grid_intervals or 2 * n
        if 3 * n >= 2 * N:
            raise QuadratureError(f"Grid with {N} intervals aliases {n} modes; need 3n < 2N")
        L = space.domain_length
        self.eta_scale = 0.75 * (8.0 * nu) ** (-1.0 / 3.0)
        constants = DriftConstants(
            l_a=2.0 * nu,
            beta=2.0,
            alpha=2.0,
            zeta=0.0,
            c=max(self.eta_scale, 2.0 * nu ** 2, L / (2.0 * np.pi)),
        )
        super().__init__(space, constants)
        self.nu = nu
        self.grid_intervals = N
        k = space.wavenumbers
        self.linear = -nu * k ** 2
        self.convective_scale = -0.5 * k * np.sqrt(2.0 / L) * (L / N) * 0.5

    def grid_values(self, y: np.ndarray) -> np.ndarray:
        """y at the N − 1 interior nodes jL/N."""
        padded = np.zeros(self.grid_intervals - 1)
        padded[: self.space.n_modes] = y
        return np.sqrt(2.0 / self.space.domain_length) * 0.5 * fft.dst(padded, type=1)

    def convection(self, y: np.ndarray) -> np.ndarray:
        """Coefficients of P_n(y∂_x y)."""
        squared = np.zeros(self.grid_intervals + 1)
        squared[1:-1] = self.grid_values(y) ** 2
        cosine = fft.dct(squared, type=1)
        return self.convective_scale * cosine[1: self.space.n_modes + 1]

    def eval(self, t: float, y: np.ndarray) -> np.ndarray:
        return self.linear * y - self.convection(y)

    def eta(self, y: np.ndarray) -> float:
        return self.eta_scale * self.space.norm_v(y) ** (4.0 / 3.0)


def make_burgers(
    n_modes: int,
    L: float,
    nu: float,
    noise_spec: NoiseSpec,
    *,
    amplitude: float = 1.0,
    grid_intervals: int | None = None,
    initial_coeffs: Sequence[float] | None = None,
) -> ModelSpec:
    """Stochastic Burgers equation with a pseudo-spectral convective term."""
    if n_modes < 4:
        raise ArgumentError(f"Burgers needs at least 4 modes, got {n_modes}")
    space = GalerkinSpace.sine_dirichlet(n_modes, L)
    y0 = np.asarray(initial_coeffs, dtype=float) if initial_coeffs is not None else decaying_profile(space, amplitude)
    return ModelSpec(
        name="burgers",
        space=space,
        drift=BurgersDrift(space, nu, grid_intervals),
        noise=build_noise(space, noise_spec),
        initial_state=CoefState(coeffs=y0),
        params={"n_modes": n_modes, "L": L, "nu": nu},
    )
