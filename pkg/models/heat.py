"""Stochastic heat equation on an interval, Dirichlet or periodic."""

from typing import Sequence

import numpy as np

from core.exceptions import ArgumentError
from domain.operators import DriftConstants, DriftOperator
from domain.spaces import BasisKind, CoefState, GalerkinSpace
from models.base import ModelSpec, decaying_profile, oracle_for
from models.noise_specs import NoiseSpec, build_noise


class HeatDrift(DriftOperator):
    """A(y) = νΔy, diagonal with multipliers −ν·wavenumber².

    Dirichlet: ⟨Ay, y⟩ = −ν‖y‖²_V, so L_A = 2ν and f = 0 in the factor-2 form.
    Periodic: ‖·‖²_V carries the full H¹ norm, which costs f = 2ν.
    """

    def __init__(self, space: GalerkinSpace, nu: float) -> None:
        if nu <= 0.0:
            raise ArgumentError(f"Viscosity must be positive, got {nu}")
        super().__init__(space, DriftConstants(l_a=2.0 * nu, beta=2.0, c=nu ** 2))
        self.nu = nu
        self.multipliers = -nu * space.wavenumbers ** 2
        self._f = 2.0 * nu if space.basis_kind is BasisKind.FOURIER_PERIODIC else 0.0

    def eval(self, t: float, y: np.ndarray) -> np.ndarray:
        return self.multipliers * y

    def f_profile(self, t: float) -> float:
        return self._f


def make_heat(
    n_modes: int,
    L: float,
    nu: float,
    noise_spec: NoiseSpec,
    *,
    boundary: str = "dirichlet",
    amplitude: float = 1.0,
    initial_coeffs: Sequence[float] | None = None,
) -> ModelSpec:
    """Heat equation with additive, linear or tanh noise."""
    if boundary == "dirichlet":
        space = GalerkinSpace.sine_dirichlet(n_modes, L)
    elif boundary == "periodic":
        space = GalerkinSpace.fourier_periodic(n_modes, L)
    else:
        raise ArgumentError(f"Unknown boundary '{boundary}', expected 'dirichlet' or 'periodic'")
    drift = HeatDrift(space, nu)
    noise = build_noise(space, noise_spec)
    y0 = np.asarray(initial_coeffs, dtype=float) if initial_coeffs is not None else decaying_profile(space, amplitude)
    return ModelSpec(
        name="heat",
        space=space,
        drift=drift,
        noise=noise,
        initial_state=CoefState(coeffs=y0),
        analytic_oracle=oracle_for(drift.multipliers, noise),
        params={"n_modes": n_modes, "L": L, "nu": nu, "boundary": boundary},
    )
