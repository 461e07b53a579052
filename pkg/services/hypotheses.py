"""Sampled audits of the monotonicity, coercivity, growth and noise hypotheses.

Every check evaluates lhs and rhs of one inequality on random states and
reports the worst normalized margin (lhs − rhs) / max(|lhs|, |rhs|, 1e-12).
A check passes when that margin stays below the tolerance.
"""

import numpy as np

from core.exceptions import ArgumentError
from core.logging import get_logger
from domain.experiment import ProbeSection
from domain.operators import DriftOperator, NoiseOperator, correction_tr
from domain.reports import HypothesisReport, InequalityCheck, RunMetadata
from domain.spaces import GalerkinSpace

logger = get_logger(__name__)

MARGIN_FLOOR = 1e-12


def normalized_margin(lhs: float, rhs: float) -> float:
    return (lhs - rhs) / max(abs(lhs), abs(rhs), MARGIN_FLOOR)


def sample_states(space: GalerkinSpace, rng: np.random.Generator, r_max: float, count: int) -> np.ndarray:
    """States with ‖y‖_H uniform on [0, r_max] and Gaussian direction, shape (count, n)."""
    directions = rng.standard_normal((count, space.n_modes))
    norms = np.sqrt(np.sum(space.h_weights * directions ** 2, axis=1))
    radii = rng.uniform(0.0, r_max, size=count)
    return directions * (radii / norms)[:, None]


def _unit_h(space: GalerkinSpace, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal(space.n_modes)
    return z / space.norm_h(z)


class _Accumulator:
    """Worst margin of one inequality over a stream of samples."""

    def __init__(self, name: str, tolerance: float) -> None:
        self.name = name
        self.tolerance = tolerance
        self.worst = -np.inf
        self.argmax: list[float] = []
        self.non_finite = 0

    def add(self, lhs: float, rhs: float, norms: list[float]) -> None:
        if not (np.isfinite(lhs) and np.isfinite(rhs)):
            self.non_finite += 1
            return
        margin = normalized_margin(lhs, rhs)
        if margin > self.worst:
            self.worst = margin
            self.argmax = [float(n) for n in norms]

    def result(self) -> InequalityCheck:
        worst = float(self.worst) if np.isfinite(self.worst) else 0.0
        return InequalityCheck(
            name=self.name,
            worst_margin=worst,
            argmax_sample_norms=self.argmax,
            passed=self.non_finite == 0 and worst <= self.tolerance,
            non_finite=self.non_finite,
        )


# ----------------------------------------------------------------------
# Two sides of each inequality
# ----------------------------------------------------------------------
def monotonicity_sides(drift: DriftOperator, t: float, x1: np.ndarray, x2: np.ndarray) -> tuple[float, float]:
    """2⟨A(t,x₁) − A(t,x₂), x₁ − x₂⟩ versus (f(t) + ρ(x₁) + η(x₂))‖x₁ − x₂‖²_H."""
    space = drift.space
    diff = x1 - x2
    lhs = 2.0 * space.pairing(drift.eval(t, x1) - drift.eval(t, x2), diff)
    rhs = (drift.f_profile(t) + drift.rho(x1) + drift.eta(x2)) * space.norm_h(diff) ** 2
    return lhs, rhs


def noise_lipschitz_sides(noise: NoiseOperator, x1: np.ndarray, x2: np.ndarray) -> tuple[float, float]:
    """‖σ(x₁) − σ(x₂)‖²_{L2} versus (κ(x₁) + ϰ(x₂))‖x₁ − x₂‖²_H."""
    space = noise.space
    lhs = sum(
        space.norm_h(noise.sigma_i(x1, i) - noise.sigma_i(x2, i)) ** 2
        for i in range(1, noise.n_noise_modes + 1)
    )
    rhs = (noise.kappa(x1) + noise.varkappa(x2)) * space.norm_h(x1 - x2) ** 2
    return float(lhs), float(rhs)


def rho_eta_growth_sides(drift: DriftOperator, x: np.ndarray) -> tuple[float, float]:
    c = drift.constants
    space = drift.space
    lhs = abs(drift.rho(x)) + abs(drift.eta(x))
    rhs = c.c * (1.0 + space.norm_v(x) ** c.beta) * (1.0 + space.norm_h(x) ** c.zeta)
    return lhs, rhs


def kappa_growth_sides(noise: NoiseOperator, x: np.ndarray) -> tuple[float, float]:
    c = noise.constants
    lhs = abs(noise.kappa(x)) + abs(noise.varkappa(x))
    return lhs, c.c * (1.0 + noise.space.norm_h(x) ** c.zeta)


def coercivity_sides(drift: DriftOperator, t: float, x: np.ndarray) -> tuple[float, float]:
    """2⟨A(t,x), x⟩ versus f(t)(1 + ‖x‖²_H) − L_A‖x‖^β_V."""
    space = drift.space
    c = drift.constants
    lhs = 2.0 * drift.dual_action(t, x, x)
    rhs = drift.f_profile(t) * (1.0 + space.norm_h(x) ** 2) - c.l_a * space.norm_v(x) ** c.beta
    return lhs, rhs


def drift_growth_sides(drift: DriftOperator, t: float, x: np.ndarray) -> tuple[float, float]:
    """‖A(t,x)‖^{β/(β−1)}_{V*} versus (f(t) + C‖x‖^β_V)(1 + ‖x‖^α_H)."""
    space = drift.space
    c = drift.constants
    lhs = drift.dual_norm(t, x) ** (c.beta / (c.beta - 1.0))
    rhs = (drift.f_profile(t) + c.c * space.norm_v(x) ** c.beta) * (1.0 + space.norm_h(x) ** c.alpha)
    return lhs, rhs


def noise_growth_sides(noise: NoiseOperator, x: np.ndarray) -> tuple[float, float]:
    lhs = noise.hilbert_schmidt_sq(x)
    return lhs, noise.constants.k * (1.0 + noise.space.norm_h(x) ** 2)


def tr_bound_sides(noise: NoiseOperator, m: int, x: np.ndarray) -> tuple[float, float]:
    """‖T̂r_m(x)‖²_H versus L(1 + ‖x‖²_H)."""
    space = noise.space
    lhs = space.norm_h(correction_tr(noise, m, x)) ** 2
    return lhs, noise.constants.l * (1.0 + space.norm_h(x) ** 2)


def tr_monotonicity_sides(noise: NoiseOperator, m: int, x1: np.ndarray, x2: np.ndarray) -> tuple[float, float]:
    """(T̂r_m(x₂) − T̂r_m(x₁), x₁ − x₂) versus (κ(x₁) + ϰ(x₂))‖x₁ − x₂‖²_H."""
    space = noise.space
    diff = x1 - x2
    lhs = space.inner_h(correction_tr(noise, m, x2) - correction_tr(noise, m, x1), diff)
    rhs = (noise.kappa(x1) + noise.varkappa(x2)) * space.norm_h(diff) ** 2
    return lhs, rhs


def hemicontinuity_sides(
    drift: DriftOperator,
    t: float,
    x1: np.ndarray,
    x2: np.ndarray,
    x: np.ndarray,
    points: int,
    ratio: float,
) -> tuple[float, float]:
    """Largest jump of λ ↦ ⟨A(t, x₁ + λx₂), x⟩ on [−1, 1] after halving the grid versus ratio·(jump before)."""
    fine = np.linspace(-1.0, 1.0, 2 * points - 1)
    phi = np.array([drift.dual_action(t, x1 + lam * x2, x) for lam in fine])
    coarse = phi[::2]
    jump_coarse = float(np.max(np.abs(np.diff(coarse))))
    jump_fine = float(np.max(np.abs(np.diff(phi))))
    scale = max(1.0, float(np.max(np.abs(phi))))
    return jump_fine, ratio * jump_coarse + MARGIN_FLOOR * scale


def noise_derivative_norm(noise: NoiseOperator, x: np.ndarray, rng: np.random.Generator, directions: int) -> float:
    """max_i of ‖σ_i(x)‖_H, ‖Dσ_i(x)‖, sampled ‖D²σ_i(x)‖ and sampled ‖Dσ_i(x)*‖ on V."""
    space = noise.space
    root = np.sqrt(space.h_weights)
    worst = 0.0
    for i in range(1, noise.n_noise_modes + 1):
        jac = noise.jacobian(x, i)
        op = root[:, None] * jac / root[None, :]
        worst = max(worst, space.norm_h(noise.sigma_i(x, i)), float(np.linalg.norm(op, ord=2)))
        # H-adjoint in coefficients: W⁻¹ Jᵀ W
        adjoint = (jac.T * space.h_weights[None, :]) / space.h_weights[:, None]
        for _ in range(directions):
            v = _unit_h(space, rng)
            w = _unit_h(space, rng)
            worst = max(worst, space.norm_h(noise.d2_sigma_i(x, i, v, w)))
            y = rng.standard_normal(space.n_modes)
            y_norm = space.norm_v(y)
            if y_norm > 0.0:
                worst = max(worst, space.norm_v(adjoint @ y) / y_norm)
    return worst


# ----------------------------------------------------------------------
# Reports
# ----------------------------------------------------------------------
def check_tr_bound(
    noise: NoiseOperator,
    m: int,
    samples: np.ndarray,
    tolerance: float = 1e-8,
) -> list[InequalityCheck]:
    """Both correction-term inequalities on the given states; pairs are consecutive rows."""
    samples = np.atleast_2d(samples)
    if samples.shape[0] == 0:
        raise ArgumentError("check_tr_bound needs at least one sample")
    bound = _Accumulator("tr_bound", tolerance)
    monotone = _Accumulator("tr_monotonicity", tolerance)
    space = noise.space
    for k, x in enumerate(samples):
        bound.add(*tr_bound_sides(noise, m, x), [space.norm_h(x)])
        partner = samples[(k + 1) % samples.shape[0]]
        monotone.add(*tr_monotonicity_sides(noise, m, x, partner), [space.norm_h(x), space.norm_h(partner)])
    return [bound.result(), monotone.result()]


def check_noise_bounds(
    noise: NoiseOperator,
    samples: np.ndarray,
    r_max: float,
    rng: np.random.Generator,
    directions: int = 4,
    tolerance: float = 1e-8,
) -> InequalityCheck:
    """Sampled σ_i, Dσ_i, D²σ_i and Dσ_i* norms against the declared bound for ‖x‖_H ≤ r_max."""
    acc = _Accumulator("noise_derivative_bounds", tolerance)
    bound = noise.h6_bound(r_max)
    for x in np.atleast_2d(samples):
        acc.add(noise_derivative_norm(noise, x, rng, directions), bound, [noise.space.norm_h(x)])
    return acc.result()


def probe_hypotheses(
    drift: DriftOperator,
    noise: NoiseOperator,
    space: GalerkinSpace,
    sampler_config: ProbeSection,
    n_trials: int,
    seed: int,
    tolerance: float = 1e-8,
    metadata: RunMetadata | None = None,
) -> HypothesisReport:
    """Audit every declared inequality of (drift, noise) on n_trials random samples."""
    if n_trials < 1:
        raise ArgumentError("probe_hypotheses needs at least one trial")
    if drift.space.n_modes != space.n_modes or noise.space.n_modes != space.n_modes:
        raise ArgumentError("Drift and noise must act on the probed space")

    cfg = sampler_config
    rng = np.random.default_rng(seed)
    names = (
        "local_monotonicity", "noise_lipschitz", "rho_eta_growth", "kappa_growth",
        "coercivity", "drift_growth", "noise_growth", "hemicontinuity",
    )
    acc = {name: _Accumulator(name, tolerance) for name in names}
    xs1 = sample_states(space, rng, cfg.r_max, n_trials)
    xs2 = sample_states(space, rng, cfg.r_max, n_trials)
    xs3 = sample_states(space, rng, cfg.r_max, n_trials)
    times = rng.uniform(0.0, cfg.t_max, size=n_trials)

    logger.info(f"Probing {type(drift).__name__} with {type(noise).__name__}: {n_trials} trials, R_max={cfg.r_max}")
    for x1, x2, x, t in zip(xs1, xs2, xs3, times):
        n1, n2 = space.norm_h(x1), space.norm_h(x2)
        with np.errstate(over="ignore", invalid="ignore"):
            acc["local_monotonicity"].add(*monotonicity_sides(drift, t, x1, x2), [n1, n2])
            acc["noise_lipschitz"].add(*noise_lipschitz_sides(noise, x1, x2), [n1, n2])
            acc["rho_eta_growth"].add(*rho_eta_growth_sides(drift, x1), [n1])
            acc["kappa_growth"].add(*kappa_growth_sides(noise, x1), [n1])
            acc["coercivity"].add(*coercivity_sides(drift, t, x1), [n1])
            acc["drift_growth"].add(*drift_growth_sides(drift, t, x1), [n1])
            acc["noise_growth"].add(*noise_growth_sides(noise, x1), [n1])
            acc["hemicontinuity"].add(
                *hemicontinuity_sides(drift, t, x1, x2, x, cfg.lambda_points, cfg.continuity_ratio),
                [n1, n2, space.norm_h(x)],
            )

    checks = [a.result() for a in acc.values()]

    tr_checks: dict[str, InequalityCheck] = {}
    for m in range(1, noise.n_noise_modes + 1):
        for check in check_tr_bound(noise, m, xs1, tolerance):
            current = tr_checks.get(check.name)
            # keep the first failure, otherwise the largest margin over m
            if current is None or (current.passed and (not check.passed or check.worst_margin > current.worst_margin)):
                tr_checks[check.name] = check
    checks.extend(tr_checks.values())
    checks.append(check_noise_bounds(noise, xs1, cfg.r_max, rng, cfg.directions, tolerance))

    report = HypothesisReport(
        metadata=metadata or RunMetadata(experiment="probe", model=type(drift).__name__, seed=seed),
        n_trials=n_trials,
        r_max=cfg.r_max,
        tolerance=tolerance,
        checks=checks,
    )
    if report.passed:
        logger.info(f"All {len(checks)} hypothesis checks passed")
    else:
        logger.warning(f"Hypothesis checks failed: {', '.join(report.failing())}")
    return report
