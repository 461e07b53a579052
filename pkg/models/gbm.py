"""Scalar geometric Brownian motion, the exactly solvable sanity model."""

import numpy as np

from domain.operators import DriftConstants, DriftOperator
from domain.spaces import CoefState, GalerkinSpace
from models.base import ModelSpec, oracle_for
from models.noise_specs import DiagonalLinearNoise


class LinearScalarDrift(DriftOperator):
    """A(y) = μy on ℝ.

    With L_A = 1 and f = max(0, 2μ + 1) both local monotonicity and the factor-2
    coercivity hold for every y.
    """

    def __init__(self, space: GalerkinSpace, mu: float) -> None:
        constants = DriftConstants(l_a=1.0, beta=2.0, alpha=0.0, zeta=0.0, c=mu ** 2)
        super().__init__(space, constants)
        self.mu = mu
        self._f = max(0.0, 2.0 * mu + 1.0)

    def eval(self, t: float, y: np.ndarray) -> np.ndarray:
        return self.mu * y

    def f_profile(self, t: float) -> float:
        return self._f


def make_gbm(mu: float, a: float, y0: float = 1.0) -> ModelSpec:
    """dY = μY dt + aY dβ_1 with Itô solution y0·exp((μ − a²/2)t + aβ_1(t))."""
    space = GalerkinSpace.scalar()
    noise = DiagonalLinearNoise(space, np.array([a]))
    return ModelSpec(
        name="gbm",
        space=space,
        drift=LinearScalarDrift(space, mu),
        noise=noise,
        initial_state=CoefState(coeffs=[y0]),
        analytic_oracle=oracle_for(np.array([mu]), noise),
        params={"mu": mu, "a": a, "y0": y0},
    )
