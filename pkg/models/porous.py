"""Porous media equation y_t = Δ(|y|^{r−1}y) posed in H^{-1}."""

from typing import Sequence

import numpy as np

from core.exceptions import ArgumentError, QuadratureError
from domain.operators import DriftConstants, DriftOperator
from domain.spaces import CoefState, GalerkinSpace, VNormKind
from models.base import ModelSpec, decaying_profile
from models.noise_specs import NoiseSpec, build_noise

MAX_EXPONENT = 31.0


class PorousDrift(DriftOperator):
    """A(y) = ΔΦ(y), Φ(y) = |y|^{r−1}y, with H = H^{-1} and V = L^{r+1}.

    Coefficients are −(kπ/L)²·∫Φ(y)φ_k, so ⟨A(y), z⟩_{H^{-1}} = −∫Φ(y)z.
    """

    superlinear = True

    def __init__(self, space: GalerkinSpace, r: float) -> None:
        super().__init__(space, DriftConstants(l_a=2.0, beta=r + 1.0, alpha=0.0, c=1.0))
        self.r = r
        _, weights = space.quadrature
        self._test = (weights[:, None] * space.basis_values).T
        self._laplacian = -space.wavenumbers ** 2

    def pressure(self, y: np.ndarray) -> np.ndarray:
        """Φ(y) at the quadrature nodes."""
        values = self.space.evaluate(y)
        out = np.abs(values) ** (self.r - 1.0) * values
        if not np.all(np.isfinite(out)):
            raise QuadratureError(f"Pressure overflow for r={self.r}")
        return out

    def eval(self, t: float, y: np.ndarray) -> np.ndarray:
        return self._laplacian * (self._test @ self.pressure(y))

    def dual_norm(self, t: float, y: np.ndarray) -> float:
        q = (self.r + 1.0) / self.r
        return float(self.space.integrate(np.abs(self.pressure(y)) ** q) ** (1.0 / q))


def make_porous_media(
    n_modes: int,
    L: float,
    r: float,
    noise_spec: NoiseSpec,
    *,
    amplitude: float = 1.0,
    initial_coeffs: Sequence[float] | None = None,
) -> ModelSpec:
    """Porous media model; r = 1 is accepted and coincides with the heat drift on H^{-1}."""
    if r < 1.0:
        raise ArgumentError(f"r must be at least 1, got {r}")
    if r > MAX_EXPONENT:
        raise QuadratureError(f"r={r} exceeds {MAX_EXPONENT}; quadrature powers underflow")
    space = GalerkinSpace.sine_dirichlet(
        n_modes, L, h_power=-2.0, v_norm=VNormKind.VALUE_LP, v_exponent=r + 1.0
    )
    y0 = np.asarray(initial_coeffs, dtype=float) if initial_coeffs is not None else decaying_profile(space, amplitude)
    return ModelSpec(
        name="porous",
        space=space,
        drift=PorousDrift(space, r),
        noise=build_noise(space, noise_spec),
        initial_state=CoefState(coeffs=y0),
        params={"n_modes": n_modes, "L": L, "r": r},
    )
