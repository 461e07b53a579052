import numpy as np
import pytest

from core.exceptions import DimensionError, TimeDomainError
from domain.noise import sample_path
from domain.spaces import GalerkinSpace
from models.noise_specs import AdditiveNoise, DiagonalLinearNoise, TanhModewiseNoise
from services.identity import identity_residual, identity_sides, identity_study

SPACE = GalerkinSpace.sine_dirichlet(6)
NOISES = {
    "additive": AdditiveNoise(SPACE, np.array([1.0, 0.5, 0.25])),
    "linear": DiagonalLinearNoise(SPACE, np.array([0.4, 0.2, 0.1])),
    "tanh": TanhModewiseNoise(SPACE, np.array([1.0, 0.5, 0.25])),
}


@pytest.fixture
def identity_path():
    return sample_path(seed=21, T=1.0, max_level=5, n_noise_modes=3)


@pytest.mark.parametrize("kind", sorted(NOISES))
@pytest.mark.parametrize("m", [2, 3, 5])
def test_sides_agree_to_roundoff(kind, m, identity_path, rng):
    frozen = rng.standard_normal((2 ** m + 1, 6))
    for t in (1.0, 0.37):
        left, right, scale, _ = identity_sides(NOISES[kind], identity_path, m, frozen, t)
        assert scale > 0.0
        assert SPACE.norm_h(left - right) <= 1e-12 * scale


def test_additive_left_side_telescopes(identity_path, rng):
    m = 3
    frozen = rng.standard_normal((2 ** m + 1, 6))
    left, _, _, _ = identity_sides(NOISES["additive"], identity_path, m, frozen, 1.0)
    expected = np.array([1.0, 0.5, 0.25]) * identity_path.grid_values(m)[:, 2 ** m - 1]
    assert np.allclose(left[:3], expected, rtol=1e-12, atol=1e-14)
    assert np.all(left[3:] == 0.0)


def test_partial_interval_flag(identity_path, rng):
    frozen = rng.standard_normal((5, 6))
    assert identity_sides(NOISES["linear"], identity_path, 2, frozen, 0.3)[3]
    assert not identity_sides(NOISES["linear"], identity_path, 2, frozen, 0.5)[3]


def test_residual_is_roundoff(identity_path, rng):
    frozen = rng.standard_normal((9, 6))
    assert identity_residual(NOISES["tanh"], identity_path, 3, frozen, 0.81) < 1e-12


def test_input_checks(identity_path, rng):
    with pytest.raises(DimensionError):
        identity_sides(NOISES["linear"], identity_path, 3, rng.standard_normal((8, 6)), 1.0)
    with pytest.raises(TimeDomainError):
        identity_sides(NOISES["linear"], identity_path, 3, rng.standard_normal((9, 6)), 1.5)


def test_small_study_passes():
    report = identity_study(["additive", "linear", "tanh"], [2, 3], n_seeds=3, seed=0)
    assert report.passed
    # two evaluation times per noise, level and seed
    assert len(report.rows) == 3 * 2 * 3 * 2
    assert report.max_relative_residual <= 1e-12
