import numpy as np
import pytest

from core.exceptions import ArgumentError
from domain.experiment import ProbeSection
from domain.operators import DriftConstants
from domain.spaces import GalerkinSpace
from models.heat import HeatDrift
from models.noise_specs import DiagonalLinearNoise
from services.hypotheses import (
    check_tr_bound,
    coercivity_sides,
    hemicontinuity_sides,
    monotonicity_sides,
    normalized_margin,
    probe_hypotheses,
    sample_states,
)

SAMPLER = ProbeSection(r_max=10.0, lambda_points=9)


def test_normalized_margin():
    assert normalized_margin(1.0, 2.0) == pytest.approx(-0.5)
    assert normalized_margin(3.0, -1.0) == pytest.approx(4.0 / 3.0)
    assert normalized_margin(0.0, 0.0) == 0.0


def test_sample_states_respect_radius(rng):
    space = GalerkinSpace.sine_dirichlet(6, h_power=-2.0)
    states = sample_states(space, rng, 3.0, 200)
    norms = np.sqrt(np.sum(space.h_weights * states ** 2, axis=1))
    assert states.shape == (200, 6)
    assert np.all(norms <= 3.0 + 1e-12)


def test_heat_probe_passes(heat):
    report = probe_hypotheses(heat.drift, heat.noise, heat.space, SAMPLER, n_trials=200, seed=11)
    assert report.passed, report.failing()
    names = {c.name for c in report.checks}
    assert {"coercivity", "local_monotonicity", "tr_bound", "noise_derivative_bounds"} <= names


def test_heat_coercivity_is_an_equality(heat, rng):
    for x in sample_states(heat.space, rng, 5.0, 20):
        lhs, rhs = coercivity_sides(heat.drift, 0.0, x)
        assert lhs == pytest.approx(rhs, rel=1e-10)


def test_heat_is_monotone(heat, rng):
    x1, x2 = sample_states(heat.space, rng, 5.0, 2)
    lhs, rhs = monotonicity_sides(heat.drift, 0.3, x1, x2)
    assert lhs <= 0.0
    assert rhs == 0.0


def test_linear_drift_halves_its_jumps(heat, rng):
    x1, x2, x = sample_states(heat.space, rng, 2.0, 3)
    fine_jump, allowed = hemicontinuity_sides(heat.drift, 0.0, x1, x2, x, 9, 0.75)
    assert fine_jump <= allowed
    assert fine_jump == pytest.approx(allowed / 1.5, rel=1e-6)


def test_overclaimed_coercivity_fails(heat):
    drift = HeatDrift(heat.space, 1.0)
    drift.constants = DriftConstants(l_a=4.0, beta=2.0, c=1.0)
    report = probe_hypotheses(drift, heat.noise, heat.space, SAMPLER, n_trials=50, seed=2)
    assert "coercivity" in report.failing()
    worst = next(c for c in report.checks if c.name == "coercivity").worst_margin
    assert worst == pytest.approx(0.5, rel=1e-9)


def test_correction_checks_for_linear_noise(rng):
    space = GalerkinSpace.sine_dirichlet(4)
    noise = DiagonalLinearNoise(space, np.array([0.4, 0.2, 0.1]))
    bound, monotone = check_tr_bound(noise, 3, sample_states(space, rng, 10.0, 50))
    assert bound.passed and monotone.passed
    with pytest.raises(ArgumentError):
        check_tr_bound(noise, 3, np.empty((0, 4)))


def test_probe_arguments(heat):
    with pytest.raises(ArgumentError):
        probe_hypotheses(heat.drift, heat.noise, heat.space, SAMPLER, n_trials=0, seed=1)
    other = GalerkinSpace.sine_dirichlet(4)
    with pytest.raises(ArgumentError):
        probe_hypotheses(heat.drift, heat.noise, other, SAMPLER, n_trials=5, seed=1)


def test_check_serializes_with_pass_alias(heat):
    report = probe_hypotheses(heat.drift, heat.noise, heat.space, SAMPLER, n_trials=5, seed=3)
    dumped = report.checks[0].model_dump(by_alias=True)
    assert "pass" in dumped and "passed" not in dumped
