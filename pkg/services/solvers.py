"""Time integrators for the Itô, Wong–Zakai and controlled Galerkin systems.

All three share one stepper; every run reads the Brownian path through
`BrownianPath.increments` or `WzDriver`, so runs on the same path see the
same ω.
"""

import math

import numpy as np

from core.exceptions import ArgumentError, BlowUpError, DimensionError
from core.logging import get_logger
from domain.noise import BrownianPath, WzDriver
from domain.operators import (
    ControlledBundle,
    ControlPath,
    CorrectionMap,
    NoiseOperator,
    ScaledNoise,
    StateMap,
    ZeroMap,
    ZeroNoise,
)
from domain.trajectory import Scheme, SolverConfig, Trajectory
from models.base import ModelSpec

logger = get_logger(__name__)


def _is_zero(op: NoiseOperator | StateMap) -> bool:
    return isinstance(op, (ZeroNoise, ZeroMap))


def _integrate(
    model: ModelSpec,
    bundle: ControlledBundle,
    path: BrownianPath,
    m: int | None,
    step_level: int,
    cfg: SolverConfig,
) -> Trajectory:
    """Explicit Euler or Heun on 2^step_level uniform steps.

    Drift part:  A_tamed + σ₂(y)Ẇ^m + σ₃(y)g − G(y), Ẇ^m frozen on each ϖ interval.
    Diffusion:   σ₁(y)Δβ, always explicit.
    """
    space = model.space
    drift = model.drift
    T = path.T
    n_steps = 2 ** step_level
    dt = T / n_steps
    beta = model.beta

    use_dw = not _is_zero(bundle.sigma1)
    use_wz = not _is_zero(bundle.sigma2)
    use_g = not _is_zero(bundle.sigma3)
    use_G = not _is_zero(bundle.G)
    d = bundle.sigma1.n_noise_modes

    if (use_dw or use_wz) and d > path.n_noise_modes:
        raise DimensionError(f"Noise needs {d} Brownian modes, path has {path.n_noise_modes}")
    if use_dw:
        if step_level > path.max_level:
            raise ArgumentError(f"Step level {step_level} exceeds path max_level {path.max_level}")
        increments = path.increments(step_level)[:d].T
    if use_wz:
        driver = WzDriver(path=path, m=m)
        wz_rates = driver.vectors[:, :d]
        steps_per_interval = 2 ** (step_level - m)
    if use_g:
        if bundle.control.horizon < T * (1.0 - 1e-12):
            raise ArgumentError(f"Control covers [0, {bundle.control.horizon}], need [0, {T}]")
        step_times = np.linspace(0.0, T, n_steps + 1)
        g_table = np.column_stack(
            [np.interp(step_times, bundle.control.times, bundle.control.values[:, j]) for j in range(d)]
        )

    tame = cfg.tames(drift.superlinear)
    tame_scale = dt ** cfg.taming_power
    heun = cfg.scheme is Scheme.HEUN

    def rhs(t: float, y: np.ndarray, w: np.ndarray | None, g: np.ndarray | None) -> np.ndarray:
        a = drift.eval(t, y)
        if tame:
            a = a / (1.0 + tame_scale * space.norm_h(a))
        if w is not None:
            a = a + bundle.sigma2.apply(y, w)
        if g is not None:
            a = a + bundle.sigma3.apply(y, g)
        if use_G:
            a = a - bundle.G(y)
        return a

    store_level = min(cfg.m_store, step_level)
    stride = 2 ** (step_level - store_level)
    stored = np.empty((2 ** store_level + 1, space.n_modes))

    y = np.array(model.y0, dtype=float)
    stored[0] = y
    guard = cfg.max_norm_guard
    v_integral = 0.0
    exited_at = 0.0 if space.norm_h(y) > guard else None

    for j in range(n_steps):
        t = j * dt
        w = wz_rates[(j // steps_per_interval)] if use_wz else None
        g0 = g_table[j] if use_g else None
        k1 = rhs(t, y, w, g0)
        if heun:
            g1 = g_table[j + 1] if use_g else None
            k2 = rhs(t + dt, y + dt * k1, w, g1)
            y_next = y + 0.5 * dt * (k1 + k2)
        else:
            y_next = y + dt * k1
        if use_dw:
            y_next = y_next + bundle.sigma1.apply(y, increments[j])

        v_integral += float(np.float64(space.norm_v(y)) ** beta) * dt
        if not np.all(np.isfinite(y_next)):
            raise BlowUpError(f"Non-finite state after t={t:.6g}", last_valid_time=t)
        y = y_next
        if exited_at is None and space.norm_h(y) + v_integral > guard:
            exited_at = (j + 1) * dt
        if (j + 1) % stride == 0:
            stored[(j + 1) // stride] = y

    times = np.linspace(0.0, T, 2 ** store_level + 1)
    return Trajectory(
        times=times,
        states=stored,
        norms_h=np.array([space.norm_h(s) for s in stored]),
        norms_v=np.array([space.norm_v(s) for s in stored]),
        v_integral=v_integral,
        exited_at=exited_at,
        step_level=step_level,
        h_weights=space.h_weights,
    )


def _zero_bundle(model: ModelSpec, T: float) -> dict:
    zero = ZeroNoise(model.space, model.noise.n_noise_modes)
    return {
        "sigma1": zero,
        "sigma2": zero,
        "sigma3": zero,
        "control": ControlPath.zero(model.noise.n_noise_modes, T),
        "G": ZeroMap(model.space),
    }


def solve_ito(model: ModelSpec, path: BrownianPath, cfg: SolverConfig) -> Trajectory:
    """Euler–Maruyama (or Heun drift) for dY = A dt + σ(Y) dW on the dt_level grid."""
    if cfg.dt_level > path.max_level:
        raise ArgumentError(f"dt_level {cfg.dt_level} exceeds path max_level {path.max_level}")
    parts = _zero_bundle(model, path.T)
    parts["sigma1"] = model.noise
    bundle = ControlledBundle(**parts)
    logger.debug(f"Itô run: model={model.name}, dt_level={cfg.dt_level}, seed={path.seed}")
    return _integrate(model, bundle, path, None, cfg.dt_level, cfg)


def wong_zakai_bundle(model: ModelSpec, m: int, cfg: SolverConfig, T: float) -> ControlledBundle:
    """(σ₁, σ₂, σ₃, G) = (0, σ, 0, ½T̂r_m), or G = 0 when the correction is switched off."""
    parts = _zero_bundle(model, T)
    parts["sigma2"] = model.noise
    if cfg.correction:
        parts["G"] = CorrectionMap(model.noise, m)
    return ControlledBundle(**parts)


def skeleton_bundle(model: ModelSpec, control: ControlPath, m: int) -> ControlledBundle:
    """Z_g: (0, 0, σ, ½T̂r_m)."""
    parts = _zero_bundle(model, control.horizon)
    parts.update(sigma3=model.noise, control=control, G=CorrectionMap(model.noise, m))
    return ControlledBundle(**parts)


def skeleton_wz_bundle(model: ModelSpec, control: ControlPath) -> ControlledBundle:
    """Z_g^m: (σ, −σ, σ, 0), i.e. +σ dW − σẆ^m dt + σg dt."""
    parts = _zero_bundle(model, control.horizon)
    parts.update(
        sigma1=model.noise,
        sigma2=ScaledNoise(model.noise, -1.0),
        sigma3=model.noise,
        control=control,
    )
    return ControlledBundle(**parts)


def solve_controlled(
    model: ModelSpec,
    bundle: ControlledBundle,
    path: BrownianPath,
    m: int,
    cfg: SolverConfig,
) -> Trajectory:
    """dX = A dt + σ₁ dW + σ₂Ẇ^m dt + σ₃g dt − G dt on 2^J steps, J = cfg.wz_step_level(m)."""
    if m < 1 or m > path.max_level:
        raise ArgumentError(f"Level m={m} outside 1..{path.max_level}")
    if cfg.dt_level < m:
        raise ArgumentError(f"dt_level {cfg.dt_level} is below the Wong–Zakai level {m}")
    if bundle.sigma1.space.n_modes != model.space.n_modes:
        raise DimensionError("Bundle operators do not act on the model space")
    step_level = cfg.wz_step_level(m)
    logger.debug(f"Controlled run: model={model.name}, m={m}, steps=2^{step_level}, seed={path.seed}")
    return _integrate(model, bundle, path, m, step_level, cfg)


def solve_wong_zakai(model: ModelSpec, path: BrownianPath, m: int, cfg: SolverConfig) -> Trajectory:
    """dY^m = A dt + σ(Y^m)Ẇ^m dt − ½T̂r_m(Y^m) dt."""
    return solve_controlled(model, wong_zakai_bundle(model, m, cfg, path.T), path, m, cfg)


def oracle_trajectory(model: ModelSpec, path: BrownianPath, store_level: int, kind: str = "ito") -> Trajectory:
    """Closed-form Itô or Stratonovich solution sampled on the level-`store_level` path grid."""
    oracle = model.analytic_oracle
    if oracle is None:
        raise ArgumentError(f"Model '{model.name}' has no closed-form solution for this noise")
    level = min(store_level, path.max_level)
    times = path.grid_times(level)
    beta_values = path.grid_values(level)
    if kind == "ito":
        states = oracle.ito(model.y0, times, beta_values)
    elif kind == "stratonovich":
        states = oracle.stratonovich(model.y0, times, beta_values)
    else:
        raise ArgumentError(f"Unknown oracle kind '{kind}'")
    return _from_states(model, times, states)


def skeleton_oracle_trajectory(model: ModelSpec, control: ControlPath, m: int, store_level: int) -> Trajectory:
    """Closed-form skeleton Z_g for linear diagonal models."""
    oracle = model.analytic_oracle
    if oracle is None:
        raise ArgumentError(f"Model '{model.name}' has no closed-form skeleton")
    times = np.linspace(0.0, control.horizon, 2 ** store_level + 1)
    return _from_states(model, times, oracle.skeleton(model.y0, times, control, m))


def _from_states(model: ModelSpec, times: np.ndarray, states: np.ndarray) -> Trajectory:
    space = model.space
    norms_v = np.array([space.norm_v(s) for s in states])
    dt = times[1] - times[0] if times.size > 1 else 0.0
    return Trajectory(
        times=times,
        states=states,
        norms_h=np.array([space.norm_h(s) for s in states]),
        norms_v=norms_v,
        v_integral=float(np.sum(norms_v[:-1] ** model.beta) * dt),
        step_level=int(round(math.log2(max(times.size - 1, 1)))),
        h_weights=space.h_weights,
    )


def sup_h_distance(t1: Trajectory, t2: Trajectory) -> float:
    """sup_t ‖t1(t) − t2(t)‖_H on t1's grid, t2 interpolated when the grids differ."""
    if t1.n_modes != t2.n_modes:
        raise DimensionError(f"Trajectories have {t1.n_modes} and {t2.n_modes} modes")
    if t1.times.shape == t2.times.shape and np.array_equal(t1.times, t2.times):
        other = t2.states
    else:
        other = t2.interpolate(t1.times)
    return float(np.max(t1.norm_h_rows(t1.states - other)))
