import numpy as np
import pytest
from pydantic import ValidationError

from core.exceptions import ArgumentError, ModeIndexError, TimeDomainError
from domain.noise import BrownianPath, WzDriver, level_normals, sample_path, wz_derivative, wz_vector


def test_sample_path_is_deterministic():
    a = sample_path(99, 1.0, 8, 2)
    b = sample_path(99, 1.0, 8, 2)
    c = sample_path(100, 1.0, 8, 2)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_sample_path_shape_and_start():
    path = sample_path(1, 2.0, 6, 3)
    assert path.values.shape == (3, 65)
    assert np.all(path.values[:, 0] == 0.0)
    assert np.allclose(path.grid_times(6)[[0, -1]], [0.0, 2.0])


def test_coarsening_is_consistent_with_direct_sampling():
    fine = sample_path(2024, 1.0, 10, 2)
    for level in (1, 4, 7):
        coarse = sample_path(2024, 1.0, level, 2)
        assert np.array_equal(fine.grid_values(level), coarse.values)
        assert np.array_equal(fine.coarsen(level).values, coarse.values)


def test_terminal_variance_matches_horizon():
    T = 0.5
    finals = np.array([sample_path(s, T, 3, 1).values[0, -1] for s in range(2000)])
    assert np.mean(finals) == pytest.approx(0.0, abs=0.07)
    assert np.mean(finals ** 2) == pytest.approx(T, abs=0.08)


def test_increment_variance_matches_step():
    path = sample_path(3, 1.0, 12, 1)
    increments = path.increments(12)[0]
    assert np.var(increments) * 2 ** 12 == pytest.approx(1.0, abs=0.1)


@pytest.mark.parametrize("kwargs", [{"T": 0.0}, {"max_level": 0}, {"n_noise_modes": 0}, {"seed": -1}])
def test_sample_path_rejects_bad_arguments(kwargs):
    args = {"seed": 1, "T": 1.0, "max_level": 4, "n_noise_modes": 1, **kwargs}
    with pytest.raises(ArgumentError):
        sample_path(**args)


def test_path_must_start_at_zero():
    with pytest.raises(ValidationError):
        BrownianPath(T=1.0, max_level=1, n_noise_modes=1, seed=0, values=[[1.0, 0.0, 0.0]])


def test_wz_derivative_vanishes_on_first_interval(path):
    driver = WzDriver(path=path, m=4)
    assert wz_derivative(driver, 0.0, 1) == 0.0
    assert wz_derivative(driver, driver.varpi * 0.999, 2) == 0.0


def test_wz_derivative_is_lagged_increment(path):
    m = 5
    driver = WzDriver(path=path, m=m)
    grid = path.grid_values(m)
    k = 7
    t = (k + 0.5) * driver.varpi
    expected = (grid[0, k] - grid[0, k - 1]) / driver.varpi
    assert wz_derivative(driver, t, 1) == pytest.approx(expected, rel=1e-14)


def test_wz_derivative_is_adapted(path):
    m = 4
    driver = WzDriver(path=path, m=m)
    k = 6
    stride = 2 ** (path.max_level - m)
    altered = np.array(path.values)
    altered[:, k * stride + 1:] += 10.0
    changed = WzDriver(path=path.model_copy(update={"values": altered}), m=m)
    for t in np.linspace(k * driver.varpi, (k + 1) * driver.varpi, 5, endpoint=False):
        assert np.array_equal(wz_vector(driver, t), wz_vector(changed, t))


def test_wz_vector_zeroes_modes_beyond_level():
    path = sample_path(5, 1.0, 6, 5)
    driver = WzDriver(path=path, m=2)
    vec = wz_vector(driver, 0.9)
    assert np.all(vec[2:] == 0.0)
    assert np.any(vec[:2] != 0.0)
    assert np.all(driver.vectors[:, 2:] == 0.0)


def test_integrated_derivative_telescopes(path):
    m = 6
    driver = WzDriver(path=path, m=m)
    grid = path.grid_values(m)
    integral = driver.vectors[: 2 ** m].sum(axis=0) * driver.varpi
    assert np.allclose(integral, grid[:, 2 ** m - 1], atol=1e-12)


def test_driver_level_cannot_exceed_path(path):
    with pytest.raises(ValidationError):
        WzDriver(path=path, m=path.max_level + 1)


def test_driver_errors(path):
    driver = WzDriver(path=path, m=3)
    with pytest.raises(TimeDomainError):
        driver.interval_index(1.5)
    with pytest.raises(ModeIndexError):
        wz_derivative(driver, 0.5, 0)
    with pytest.raises(ModeIndexError):
        wz_derivative(driver, 0.5, 4)


@pytest.mark.parametrize("m", [2, 3])
def test_driver_second_moment(m):
    # E‖Ẇ^m(t)‖² = min(m, d)/ϖ on every interval after the first
    d = 8
    T = 1.0
    squares = []
    for seed in range(200):
        driver = WzDriver(path=sample_path(seed, T, m, d), m=m)
        squares.append(np.sum(driver.vectors[1: 2 ** m + 1] ** 2, axis=1))
    expected = min(m, d) / (T / 2 ** m)
    assert np.mean(squares) == pytest.approx(expected, rel=0.1)


@pytest.mark.parametrize("seed", [0, 17, 2 ** 40 + 3])
def test_level_one_rates_come_from_the_first_two_counters(seed):
    T = 2.0
    path = sample_path(seed, T, 6, 2)
    driver = WzDriver(path=path, m=1)
    for mode in range(2):
        terminal = np.sqrt(T) * level_normals(seed, mode, 0, 1)[0]
        midpoint = 0.5 * terminal + np.sqrt(T / 4) * level_normals(seed, mode, 1, 1)[0]
        assert driver.rates[1, mode] * driver.varpi == pytest.approx(midpoint, rel=1e-12, abs=1e-14)
        assert driver.rates[2, mode] * driver.varpi == pytest.approx(terminal - midpoint, rel=1e-12, abs=1e-14)


def test_fine_increments_sum_to_driver_increments(path):
    # Itô and Wong–Zakai runs at any levels read the same ω
    m, J = 4, path.max_level
    driver = WzDriver(path=path, m=m)
    fine = path.increments(J)
    stride = 2 ** (J - m)
    for k in range(2 ** m):
        block = fine[:, k * stride: (k + 1) * stride].sum(axis=1)
        assert np.allclose(block, driver.rates[k + 1] * driver.varpi, atol=1e-12)
