"""Rearrangement identity of the Wong–Zakai drift term σ(Y^m)Ẇ^m.

The left side integrates σ(Y^m((⌊s/ϖ⌋ − 1)ϖ))Ẇ^m(s) over [0, t]. The right
side is the Itô-type sum with the indicator weight
ϖ⁻¹∫_{⌈s/ϖ⌉ϖ}^{(⌈s/ϖ⌉+1)ϖ} 1{l ≤ t} dl against Π_m-projected increments.
Both are finite sums over the level-m grid; they are evaluated in different
orders with compensated summation so that their distance measures roundoff.
"""

import math

import numpy as np

from core.exceptions import ArgumentError, DimensionError, TimeDomainError
from core.logging import get_logger
from domain.noise import BrownianPath, WzDriver, sample_path
from domain.operators import NoiseOperator
from domain.reports import IdentityReport, IdentityRow, RunMetadata
from domain.spaces import GalerkinSpace, project_pim
from models.noise_specs import NoiseKind, NoiseSpec, build_noise

logger = get_logger(__name__)


def _fsum_rows(terms: list[np.ndarray], n_modes: int) -> np.ndarray:
    if not terms:
        return np.zeros(n_modes)
    stacked = np.vstack(terms)
    return np.array([math.fsum(stacked[:, j]) for j in range(n_modes)])


def identity_sides(
    noise: NoiseOperator,
    path: BrownianPath,
    m: int,
    frozen_states: np.ndarray,
    t: float,
) -> tuple[np.ndarray, np.ndarray, float, bool]:
    """Both sides of the identity, the scale Σ‖terms‖_H and the partial-interval flag."""
    driver = WzDriver(path=path, m=m)
    varpi = driver.varpi
    n_intervals = 2 ** m
    if frozen_states.shape != (n_intervals + 1, noise.space.n_modes):
        raise DimensionError(
            f"frozen_states must have shape {(n_intervals + 1, noise.space.n_modes)}, got {frozen_states.shape}"
        )
    if t < 0.0 or t > path.T:
        raise TimeDomainError(f"Time {t} outside [0, {path.T}]")
    d = noise.n_noise_modes
    if d > path.n_noise_modes:
        raise DimensionError(f"Noise needs {d} Brownian modes, path has {path.n_noise_modes}")

    n = noise.space.n_modes
    partial = not math.isclose(math.remainder(t, varpi), 0.0, abs_tol=1e-12 * max(varpi, 1.0))

    # left: interval by interval in s, rate times covered length
    left_terms = []
    for k in range(n_intervals):
        start = k * varpi
        if start >= t:
            break
        covered = min(t, start + varpi) - start
        rate = driver.vectors[k, :d]
        previous = frozen_states[max(k - 1, 0)]
        left_terms.append(noise.apply(previous, rate) * covered)

    # right: Itô sum over j in reverse order, weight from the indicator integral
    grid = path.grid_values(m)
    active = min(m, d)
    right_terms = []
    scale = 0.0
    for j in range(n_intervals - 1, -1, -1):
        lower = (j + 1) * varpi
        weight = (min(t, lower + varpi) - min(t, lower)) / varpi
        if weight <= 0.0:
            continue
        increment = np.zeros(d)
        increment[:active] = project_pim(grid[:d, j + 1] - grid[:d, j], active)
        term = weight * noise.apply(frozen_states[j], increment)
        right_terms.append(term)
        scale += noise.space.norm_h(term)

    return _fsum_rows(left_terms, n), _fsum_rows(right_terms, n), scale, partial


def identity_residual(
    noise: NoiseOperator,
    path: BrownianPath,
    m: int,
    frozen_states: np.ndarray,
    t: float,
) -> float:
    """H-distance between the two sides of the rearrangement identity."""
    left, right, _, _ = identity_sides(noise, path, m, frozen_states, t)
    return noise.space.norm_h(left - right)


def _identity_noise(space: GalerkinSpace, kind: str, n_noise_modes: int) -> NoiseOperator:
    i = np.arange(1, n_noise_modes + 1, dtype=float)
    coefficients = {"additive": 1.0 / i, "linear": 0.4 / i, "tanh": 1.0 / i}[kind]
    return build_noise(space, NoiseSpec(kind=NoiseKind(kind), coefficients=coefficients.tolist()))


def identity_study(
    noises: list[str],
    m_levels: list[int],
    n_seeds: int,
    seed: int,
    T: float = 1.0,
    n_modes: int = 8,
    n_noise_modes: int = 3,
    t: float | None = None,
    tolerance: float = 1e-12,
    metadata: RunMetadata | None = None,
) -> IdentityReport:
    """Residuals over noises × levels × seeds, at t (default T) and at one random off-grid time per seed."""
    if not m_levels:
        raise ArgumentError("m_levels cannot be empty")
    if n_noise_modes > n_modes:
        raise ArgumentError("n_noise_modes cannot exceed n_modes for modewise noises")
    space = GalerkinSpace.sine_dirichlet(n_modes)
    top = max(m_levels)
    t_eval = T if t is None else t
    rows: list[IdentityRow] = []
    worst = 0.0

    logger.info(f"Identity check: noises={noises}, m={m_levels}, {n_seeds} seeds")
    for kind in noises:
        noise = _identity_noise(space, kind, n_noise_modes)
        for s in range(n_seeds):
            path = sample_path(seed + s, T, top, n_noise_modes)
            rng = np.random.default_rng(seed + s)
            for m in m_levels:
                frozen = rng.standard_normal((2 ** m + 1, n_modes))
                for time in (t_eval, float(rng.uniform(0.0, T))):
                    left, right, scale, partial = identity_sides(noise, path, m, frozen, time)
                    residual = space.norm_h(left - right)
                    if scale > 0.0:
                        worst = max(worst, residual / scale)
                    elif residual > 0.0:
                        worst = math.inf
                    rows.append(
                        IdentityRow(
                            noise=kind, m=m, seed=seed + s, t=time,
                            residual=residual, scale=scale, partial_interval=partial,
                        )
                    )

    report = IdentityReport(
        metadata=metadata or RunMetadata(experiment="identity", model="frozen-states", seed=seed),
        tolerance=tolerance,
        rows=rows,
        max_relative_residual=worst,
        passed=worst <= tolerance,
    )
    logger.info(f"Identity check: max relative residual {worst:.3e} ({'pass' if report.passed else 'fail'})")
    return report
