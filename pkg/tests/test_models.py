import numpy as np
import pytest
from pydantic import ValidationError

from core.exceptions import ArgumentError, ConfigurationError, QuadratureError
from domain.operators import ControlPath
from models.burgers import make_burgers
from models.gbm import make_gbm
from models.heat import make_heat
from models.noise_specs import NoiseKind, NoiseSpec, TanhModewiseNoise
from models.plaplace import make_plaplace
from models.porous import make_porous_media
from models.registry import MODEL_FACTORIES, build_model

ZERO = NoiseSpec()


def test_registry_knows_every_shipped_model():
    assert set(MODEL_FACTORIES) == {"gbm", "heat", "burgers", "plaplace", "porous"}


def test_unknown_model_is_a_configuration_error():
    with pytest.raises(ConfigurationError, match="available"):
        build_model("navier-stokes", {}, ZERO)


def test_bad_model_parameter_is_a_configuration_error():
    with pytest.raises(ConfigurationError):
        build_model("heat", {"n_modes": 4, "viscosity": 1.0}, ZERO)


def test_gbm_rejects_tanh_noise():
    with pytest.raises(ConfigurationError):
        build_model("gbm", {}, NoiseSpec(kind=NoiseKind.TANH, coefficients=[1.0]))


def test_gbm_takes_gain_from_noise_coefficients():
    model = build_model("gbm", {"mu": 0.2}, NoiseSpec(kind=NoiseKind.LINEAR, coefficients=[0.7]))
    assert model.params == {"mu": 0.2, "a": 0.7, "y0": 1.0}


def test_heat_dual_action_is_minus_viscous_energy(heat, rng):
    y = rng.standard_normal(heat.space.n_modes)
    assert heat.drift.dual_action(0.0, y, y) == pytest.approx(-heat.space.norm_v(y) ** 2, rel=1e-12)


def test_periodic_heat_pays_for_the_mean_mode():
    model = make_heat(5, 1.0, 0.5, ZERO, boundary="periodic")
    assert model.drift.f_profile(0.0) == pytest.approx(1.0)
    assert model.drift.multipliers[0] == 0.0


def test_unknown_boundary():
    with pytest.raises(ArgumentError):
        make_heat(4, 1.0, 1.0, ZERO, boundary="neumann")


def test_initial_state_must_match_space():
    with pytest.raises(ValidationError):
        make_heat(4, 1.0, 1.0, ZERO, initial_coeffs=[1.0, 0.5])


def test_burgers_convection_is_energy_neutral(rng):
    model = make_burgers(16, 1.0, 0.1, ZERO)
    for _ in range(5):
        y = rng.standard_normal(16)
        convection = model.drift.convection(y)
        scale = model.space.norm_h(convection) * model.space.norm_h(y)
        assert abs(model.space.pairing(convection, y)) <= 1e-9 * max(scale, 1.0)


def test_burgers_aliasing_guard():
    with pytest.raises(QuadratureError):
        make_burgers(8, 1.0, 0.1, ZERO, grid_intervals=12)
    with pytest.raises(ArgumentError):
        make_burgers(3, 1.0, 0.1, ZERO)


def test_plaplace_at_two_is_the_laplacian(rng):
    model = make_plaplace(8, 1.0, 2.0, ZERO)
    y = rng.standard_normal(8)
    expected = -model.space.wavenumbers ** 2 * y
    assert np.allclose(model.drift.eval(0.0, y), expected, rtol=1e-9, atol=1e-9 * np.max(np.abs(expected)))


def test_plaplace_dual_action_is_minus_v_norm_power(rng):
    model = make_plaplace(8, 1.0, 3.0, ZERO)
    y = rng.standard_normal(8)
    assert model.drift.dual_action(0.0, y, y) == pytest.approx(-model.space.norm_v(y) ** 3, rel=1e-10)


def test_plaplace_exponent_range():
    with pytest.raises(ArgumentError):
        make_plaplace(4, 1.0, 1.5, ZERO)
    with pytest.raises(QuadratureError):
        make_plaplace(4, 1.0, 40.0, ZERO)


def test_porous_at_one_is_the_laplacian(rng):
    model = make_porous_media(8, 1.0, 1.0, ZERO)
    y = rng.standard_normal(8)
    expected = -model.space.wavenumbers ** 2 * y
    assert np.allclose(model.drift.eval(0.0, y), expected, rtol=1e-9, atol=1e-9 * np.max(np.abs(expected)))


def test_porous_dual_action_is_minus_v_norm_power(rng):
    model = make_porous_media(8, 1.0, 2.0, ZERO)
    y = rng.standard_normal(8)
    assert model.drift.dual_action(0.0, y, y) == pytest.approx(-model.space.norm_v(y) ** 3, rel=1e-8)


def test_gbm_oracle_formula():
    model = make_gbm(0.1, 0.5, y0=2.0)
    times = np.array([0.0, 0.5, 1.0])
    beta = np.array([[0.0, 0.3, -0.2]])
    expected = 2.0 * np.exp((0.1 - 0.125) * times + 0.5 * beta[0])
    assert np.allclose(model.analytic_oracle.ito(model.y0, times, beta)[:, 0], expected)
    strat = 2.0 * np.exp(0.1 * times + 0.5 * beta[0])
    assert np.allclose(model.analytic_oracle.stratonovich(model.y0, times, beta)[:, 0], strat)


def test_gbm_skeleton_oracle_with_constant_control():
    model = make_gbm(0.1, 0.5)
    times = np.linspace(0.0, 1.0, 5)
    z = model.analytic_oracle.skeleton(model.y0, times, ControlPath.constant([0.3], 1.0), m=1)
    assert np.allclose(z[:, 0], np.exp(0.125 * times))


def test_tanh_noise_has_no_oracle(heat):
    swapped = heat.with_noise(TanhModewiseNoise(heat.space, np.array([0.5])))
    assert swapped.analytic_oracle is None
    assert swapped.noise.n_noise_modes == 1


def test_gbm_rejects_unknown_parameters():
    with pytest.raises(ConfigurationError, match="muu"):
        build_model("gbm", {"muu": 0.3}, NoiseSpec(kind=NoiseKind.LINEAR, coefficients=[0.5]))


def test_gbm_gain_must_agree_with_noise():
    linear = NoiseSpec(kind=NoiseKind.LINEAR, coefficients=[0.5])
    with pytest.raises(ConfigurationError, match="disagrees"):
        build_model("gbm", {"a": 0.7}, linear)
    assert build_model("gbm", {"a": 0.5}, linear).params["a"] == 0.5
    with pytest.raises(ConfigurationError):
        build_model("gbm", {}, NoiseSpec(kind=NoiseKind.LINEAR, coefficients=[0.5, 0.2]))


def test_factory_validation_errors_become_configuration_errors():
    with pytest.raises(ConfigurationError):
        build_model("heat", {"n_modes": 4, "initial_coeffs": [1.0, 0.5]}, ZERO)
