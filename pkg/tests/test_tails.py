import numpy as np
import pytest
from scipy import stats

from core.exceptions import ArgumentError
from domain.noise import WzDriver, sample_path
from services.tails import noise_exit_time, tail_probability_closed_form, tail_probability_estimate, tail_study


def test_closed_form_at_level_one():
    p_coordinate, p_norm = tail_probability_closed_form(1.0, 1, 1.0)
    single = 2.0 * stats.norm.sf(1.0)
    assert p_coordinate == pytest.approx(1.0 - (1.0 - single) ** 2)
    # one mode: the coordinate and norm events coincide
    assert p_norm == pytest.approx(p_coordinate)


def test_closed_form_decreases_in_m():
    values = [tail_probability_closed_form(1.0, m, 2.0) for m in range(3, 9)]
    coordinate = [v[0] for v in values]
    norm = [v[1] for v in values]
    assert all(b < a for a, b in zip(coordinate, coordinate[1:]))
    assert all(b <= a for a, b in zip(norm, norm[1:]))


def test_closed_form_arguments():
    with pytest.raises(ArgumentError):
        tail_probability_closed_form(1.0, 0, 2.0)
    with pytest.raises(ArgumentError):
        tail_probability_closed_form(1.0, 3, -1.0)


def test_estimate_agrees_with_closed_form():
    m_list = [1, 2, 3]
    n = 400
    coordinate, norm = tail_probability_estimate(1.0, m_list, 1.0, n, seed=100)
    for j, m in enumerate(m_list):
        exact_coordinate, exact_norm = tail_probability_closed_form(1.0, m, 1.0)
        for estimate, exact in ((coordinate[j], exact_coordinate), (norm[j], exact_norm)):
            se = np.sqrt(exact * (1.0 - exact) / n)
            assert abs(estimate - exact) <= 5.0 * se + 1e-12


def test_estimate_needs_enough_samples():
    with pytest.raises(ArgumentError):
        tail_probability_estimate(1.0, [2, 3], 2.0, 50, seed=0)
    with pytest.raises(ArgumentError):
        tail_probability_estimate(1.0, [], 2.0, 200, seed=0)


@pytest.mark.slow
def test_tail_study_trend():
    report = tail_study(1.0, [3, 4, 5, 6, 7, 8], 2.0, 2000, seed=0)
    assert report.passed
    assert report.estimate_coordinate[-1] < 0.05
    assert len(report.table_rows()) == 6


def test_noise_exit_time_is_first_crossing_row():
    m = 3
    driver = WzDriver(path=sample_path(11, 1.0, m, 1), m=m)
    rates = np.abs(driver.rates[:, 0])
    # one active mode: the coordinate threshold δ√m·2^{m/2} binds before the norm one
    delta = float(np.sort(rates)[-3]) / (np.sqrt(m) * 2 ** (m / 2)) * 0.999
    first = int(np.flatnonzero(rates > delta * np.sqrt(m) * 2 ** (m / 2))[0])
    assert first >= 1
    assert noise_exit_time(driver, delta) == pytest.approx(first * driver.varpi)


def test_noise_exit_time_extremes():
    driver = WzDriver(path=sample_path(4, 1.0, 4, 2), m=4)
    assert noise_exit_time(driver, 1e6) is None
    # row 0 carries no derivative, so the earliest exit is ϖ
    assert noise_exit_time(driver, 1e-12) == pytest.approx(driver.varpi)


def test_noise_exit_time_ignores_inactive_modes():
    # at m = 1 only the first noise mode enters Ẇ^m
    path = sample_path(9, 1.0, 1, 3)
    driver = WzDriver(path=path, m=1)
    top = np.max(np.abs(driver.rates[:, 0]))
    delta = top / 2 ** 0.5 * 1.001
    assert noise_exit_time(driver, delta) is None
