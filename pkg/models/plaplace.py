"""p-Laplacian y_t = ∂_x(|∂_x y|^{p−2}∂_x y) with Dirichlet walls."""

from typing import Sequence

import numpy as np

from core.exceptions import ArgumentError, QuadratureError
from domain.operators import DriftConstants, DriftOperator
from domain.spaces import CoefState, GalerkinSpace, VNormKind
from models.base import ModelSpec, decaying_profile
from models.noise_specs import NoiseSpec, build_noise

MAX_EXPONENT = 32.0


class PLaplaceDrift(DriftOperator):
    """⟨A(y), z⟩ = −∫|y_x|^{p−2}y_x z_x dx by Gauss–Legendre quadrature.

    ⟨A(y), y⟩ = −‖y‖^p_V, so the factor-2 coercivity holds with L_A = 2, and
    ‖A(y)‖_{V*} is the L^{p'} norm of the flux, giving ‖A‖^{p'}_{V*} = ‖y‖^p_V.
    """

    superlinear = True

    def __init__(self, space: GalerkinSpace, p: float) -> None:
        super().__init__(space, DriftConstants(l_a=2.0, beta=p, alpha=0.0, c=1.0))
        self.p = p
        _, weights = space.quadrature
        # columns weighted once, so eval is a single matrix-vector product
        self._test = (weights[:, None] * space.basis_derivatives).T

    def flux(self, y: np.ndarray) -> np.ndarray:
        """|y_x|^{p−2}y_x at the quadrature nodes."""
        grad = self.space.evaluate_derivative(y)
        out = np.abs(grad) ** (self.p - 2.0) * grad
        if not np.all(np.isfinite(out)):
            raise QuadratureError(f"Flux overflow for p={self.p}")
        return out

    def eval(self, t: float, y: np.ndarray) -> np.ndarray:
        return -self._test @ self.flux(y)

    def dual_norm(self, t: float, y: np.ndarray) -> float:
        q = self.p / (self.p - 1.0)
        return float(self.space.integrate(np.abs(self.flux(y)) ** q) ** (1.0 / q))


def make_plaplace(
    n_modes: int,
    L: float,
    p: float,
    noise_spec: NoiseSpec,
    *,
    amplitude: float = 1.0,
    initial_coeffs: Sequence[float] | None = None,
) -> ModelSpec:
    """p-Laplace evolution; p = 2 is accepted and coincides with the unit-viscosity heat drift."""
    if p < 2.0:
        raise ArgumentError(f"p must be at least 2, got {p}")
    if p > MAX_EXPONENT:
        raise QuadratureError(f"p={p} exceeds {MAX_EXPONENT}; quadrature powers underflow")
    space = GalerkinSpace.sine_dirichlet(n_modes, L, v_norm=VNormKind.GRADIENT_LP, v_exponent=p)
    y0 = np.asarray(initial_coeffs, dtype=float) if initial_coeffs is not None else decaying_profile(space, amplitude)
    return ModelSpec(
        name="plaplace",
        space=space,
        drift=PLaplaceDrift(space, p),
        noise=build_noise(space, noise_spec),
        initial_state=CoefState(coeffs=y0),
        params={"n_modes": n_modes, "L": L, "p": p},
    )
