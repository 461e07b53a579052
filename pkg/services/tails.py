"""Tail probabilities of the piecewise-constant Wong–Zakai derivative."""

import numpy as np
from scipy import stats

from core.exceptions import ArgumentError
from core.logging import get_logger
from domain.noise import WzDriver, sample_path
from domain.reports import RunMetadata, TailReport

logger = get_logger(__name__)


def _thresholds(m: int, delta: float) -> tuple[float, float]:
    """δ√m·2^{m/2} for one coordinate and δ·m·2^{m/2} for the ℓ² norm."""
    scale = 2.0 ** (m / 2.0)
    return delta * np.sqrt(m) * scale, delta * m * scale


def tail_probability_closed_form(T: float, m: int, delta: float) -> tuple[float, float]:
    """Exact probabilities of both events.

    With ϖ = T/2^m every β̇_i^m is Δβ/ϖ with Δβ ~ N(0, ϖ), so the coordinate
    event is a max over m·2^m independent |N(0,1)| > δ√(mT) and the norm
    event a max over 2^m independent χ²_m > δ²m²T.
    """
    if T <= 0.0 or m < 1 or delta <= 0.0:
        raise ArgumentError(f"Need T > 0, m ≥ 1, δ > 0; got T={T}, m={m}, δ={delta}")
    single = 2.0 * stats.norm.sf(delta * np.sqrt(m * T))
    p_coordinate = -np.expm1(m * 2 ** m * np.log1p(-single))
    chi = stats.chi2.sf(delta ** 2 * m ** 2 * T, df=m)
    p_norm = -np.expm1(2 ** m * np.log1p(-chi))
    return float(p_coordinate), float(p_norm)


def noise_exit_time(driver: WzDriver, delta: float) -> float | None:
    """First grid time kϖ at which Ẇ^m crosses either threshold, None if it never does."""
    coordinate, norm = _thresholds(driver.m, delta)
    vectors = driver.vectors
    hit = (np.max(np.abs(vectors), axis=1) > coordinate) | (np.sqrt(np.sum(vectors ** 2, axis=1)) > norm)
    rows = np.flatnonzero(hit)
    if rows.size == 0:
        return None
    return float(rows[0] * driver.varpi)


def tail_probability_estimate(
    T: float,
    m_list: list[int],
    delta: float,
    n_samples: int,
    seed: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Monte-Carlo frequencies of sup_{i≤m, s≤T} |β̇_i^m(s)| and sup_s ‖Ẇ^m(s)‖_U exceeding their thresholds.

    Sample s uses the path with seed + s at level max(m_list) and max(m_list)
    modes, so every level sees the same ω.
    """
    if not m_list:
        raise ArgumentError("m_list cannot be empty")
    if n_samples < 100:
        raise ArgumentError(f"n_samples must be at least 100, got {n_samples}")
    top = max(m_list)
    hits_coordinate = np.zeros(len(m_list))
    hits_norm = np.zeros(len(m_list))
    thresholds = [_thresholds(m, delta) for m in m_list]

    for s in range(n_samples):
        path = sample_path(seed + s, T, top, top)
        for j, m in enumerate(m_list):
            vectors = WzDriver(path=path, m=m).vectors
            coordinate, norm = thresholds[j]
            if np.max(np.abs(vectors)) > coordinate:
                hits_coordinate[j] += 1
            if np.max(np.sqrt(np.sum(vectors ** 2, axis=1))) > norm:
                hits_norm[j] += 1

    return hits_coordinate / n_samples, hits_norm / n_samples


def _binomial_se(p: np.ndarray, n: int) -> np.ndarray:
    return np.sqrt(p * (1.0 - p) / n)


def _nonincreasing(values: np.ndarray, se: np.ndarray, n_se: float) -> bool:
    """Each value stays below its predecessor up to n_se combined standard errors."""
    for a, b, sa, sb in zip(values, values[1:], se, se[1:]):
        if b > a + n_se * np.hypot(sa, sb):
            return False
    return True


def tail_study(
    T: float,
    m_list: list[int],
    delta: float,
    n_samples: int,
    seed: int,
    max_final: float = 0.05,
    inversion_se: float = 2.0,
    metadata: RunMetadata | None = None,
) -> TailReport:
    """Estimates, closed forms and the trend verdict for both events."""
    logger.info(f"Tail study: δ={delta}, T={T}, m={m_list}, {n_samples} samples")
    coordinate, norm = tail_probability_estimate(T, m_list, delta, n_samples, seed)
    exact = [tail_probability_closed_form(T, m, delta) for m in m_list]
    se_coordinate = _binomial_se(coordinate, n_samples)
    se_norm = _binomial_se(norm, n_samples)

    nonincreasing = _nonincreasing(coordinate, se_coordinate, inversion_se) and _nonincreasing(
        norm, se_norm, inversion_se
    )
    final_ok = bool(coordinate[-1] < max_final and norm[-1] < max_final)
    report = TailReport(
        metadata=metadata or RunMetadata(experiment="tails", model="brownian", seed=seed),
        T=T,
        delta=delta,
        n_samples=n_samples,
        m_levels=list(m_list),
        estimate_coordinate=coordinate.tolist(),
        estimate_norm=norm.tolist(),
        closed_form_coordinate=[e[0] for e in exact],
        closed_form_norm=[e[1] for e in exact],
        std_error_coordinate=se_coordinate.tolist(),
        std_error_norm=se_norm.tolist(),
        nonincreasing=nonincreasing,
        final_ok=final_ok,
        passed=nonincreasing and final_ok,
    )
    logger.info(f"Tail study verdict: {'pass' if report.passed else 'fail'}")
    return report
