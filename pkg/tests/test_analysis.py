import asyncio
import math

import numpy as np
import pytest

from core.exceptions import ArgumentError, QuotaBreachError
from domain.experiment import SkeletonSection, Thresholds, load_experiment_config
from domain.trajectory import Trajectory
from services.analysis import (
    ExperimentService,
    build_control,
    fit_log2_slope,
    guard_statistics,
    increment_moduli,
    mean_and_se,
    trend_verdict,
)

THRESHOLDS = Thresholds()


def test_mean_and_se():
    mean, se = mean_and_se([1.0, 2.0, 3.0])
    assert mean == pytest.approx(2.0)
    assert se == pytest.approx(1.0 / math.sqrt(3.0))
    assert mean_and_se([4.0]) == (4.0, 0.0)
    assert all(math.isnan(v) for v in mean_and_se([]))


def test_fit_log2_slope():
    levels = [1, 2, 3, 4, 5]
    slope, (low, high) = fit_log2_slope(levels, [2.0 ** -m for m in levels])
    assert slope == pytest.approx(-1.0)
    assert low == pytest.approx(-1.0) and high == pytest.approx(-1.0)
    assert math.isnan(fit_log2_slope([1, 2], [0.5, 0.25])[0])


def test_trend_verdict_decreasing():
    verdict = trend_verdict([1.0, 0.5, 0.25, 0.1], [0.01] * 4, THRESHOLDS)
    assert verdict.passed and verdict.inversions == 0
    assert verdict.final_ratio == pytest.approx(0.1)


def test_trend_verdict_tolerates_one_small_inversion():
    verdict = trend_verdict([1.0, 0.5, 0.55, 0.1], [0.1] * 4, THRESHOLDS)
    assert verdict.inversions == 1
    assert verdict.monotone and verdict.passed


def test_trend_verdict_rejects_large_inversion():
    verdict = trend_verdict([1.0, 0.2, 0.9, 0.1], [0.01] * 4, THRESHOLDS)
    assert not verdict.monotone and not verdict.passed


def test_trend_verdict_ratio_and_quota():
    assert not trend_verdict([1.0, 0.9, 0.8], [0.01] * 3, THRESHOLDS).ratio_ok
    verdict = trend_verdict([1.0, 0.5, 0.1], [0.01] * 3, THRESHOLDS, n_blowups=5, n_paths=100)
    assert not verdict.quota_ok and not verdict.passed


def test_trend_verdict_zero_noise_passes_outright():
    verdict = trend_verdict([1e-9, 2e-9, 1e-9], [0.0] * 3, THRESHOLDS)
    assert verdict.passed and verdict.final_ratio == 0.0


@pytest.fixture
def ramp() -> Trajectory:
    times = np.linspace(0.0, 1.0, 2 ** 10 + 1)
    return Trajectory(times=times, states=times[:, None], norms_h=times, norms_v=times)


def test_increment_moduli_of_a_ramp(ramp):
    varpi = 1.0 / 8.0
    moduli = increment_moduli(ramp, 3)
    assert moduli["floor"] == pytest.approx(8 * varpi ** 3 / 3, rel=0.02)
    assert moduli["ceil"] == pytest.approx(moduli["floor"], rel=1e-9)
    assert moduli["floor_prev"] == pytest.approx(50 * varpi ** 3 / 3, rel=0.02)


def test_increment_moduli_stop_at_tau(ramp):
    full = increment_moduli(ramp, 3)
    half = increment_moduli(ramp, 3, tau=0.5)
    assert half["floor"] == pytest.approx(full["floor"] / 2, rel=1e-9)


def test_guard_statistics_sorted():
    rows = guard_statistics("gbm", 4, {math.inf: [False, False, False], 0.5: [True, True, False]})
    assert [r.max_norm_guard for r in rows] == [0.5, math.inf]
    assert rows[0].n_exited == 2
    assert rows[0].exit_fraction == pytest.approx(2.0 / 3.0)
    assert rows[1].exit_fraction == 0.0


def test_constant_control_is_zero_padded():
    control = build_control(SkeletonSection(values=[0.3]), 3, 1.0)
    assert np.allclose(control(0.4), [0.3, 0.0, 0.0])


def test_sine_control_mode_must_exist():
    with pytest.raises(ArgumentError):
        build_control(SkeletonSection(kind="sine", mode=4), 3, 1.0)
    control = build_control(SkeletonSection(kind="sine", mode=2, amplitude=2.0), 2, 1.0)
    assert control(0.25) == pytest.approx([0.0, 2.0], abs=1e-12)


def _service(path) -> ExperimentService:
    return ExperimentService(load_experiment_config(path), threads=2, progress=False)


def test_convergence_study_against_oracle(small_gbm_config):
    report = asyncio.run(_service(small_gbm_config).convergence_study())
    assert report.reference == "oracle"
    assert report.n_blowups == 0
    assert len(report.mean_sq_sup_error) == 3
    assert all(e > 0.0 for e in report.mean_sq_sup_error)
    assert report.mean_sq_sup_error[-1] < report.mean_sq_sup_error[0]
    assert report.metadata.config_hash


def test_uncorrected_study_uses_stratonovich_oracle(write_config, small_gbm_text):
    path = write_config(small_gbm_text.replace("m_store = 6", "m_store = 6\ncorrection = false"))
    report = asyncio.run(_service(path).convergence_study())
    assert report.reference == "stratonovich-oracle"
    assert report.verdict.bias_ok is not None


def test_simulate_is_deterministic(small_gbm_config):
    service = _service(small_gbm_config)
    first = asyncio.run(service.simulate())
    second = asyncio.run(service.simulate())
    assert np.array_equal(first[2].states, second[2].states)
    assert first[0].sup_distance == second[0].sup_distance
    assert first[0].m == 4


def test_guard_study(small_gbm_config):
    table = asyncio.run(_service(small_gbm_config).guard_study())
    assert [r.exit_fraction for r in table.rows] == [1.0, 0.0]
    assert table.nonincreasing


def test_energy_study_shapes(small_gbm_config):
    report = asyncio.run(_service(small_gbm_config).energy_study())
    assert len(report.mean_energy) == 3
    assert report.ito_energy is not None
    assert report.controlled_energy is None


def test_refinement_needs_a_spatial_model(small_gbm_config):
    with pytest.raises(ArgumentError):
        asyncio.run(_service(small_gbm_config).n_refinement_study())


def test_every_path_blowing_up_breaches_the_quota(write_config, small_gbm_text):
    text = small_gbm_text.replace("mu = 0.1\na = 0.5", "mu = 1e150\na = 0.0")
    service = _service(write_config(text))
    with pytest.raises(QuotaBreachError):
        asyncio.run(service.convergence_study())


def test_increment_modulus_stops_when_the_noise_derivative_is_large(write_config, small_gbm_text):
    # δ → 0 makes Ẇ^m cross its threshold on the first interval it is nonzero, so τ = ϖ
    default = asyncio.run(_service(write_config(small_gbm_text)).increment_modulus(m_levels=[2, 3, 4]))
    tight_text = small_gbm_text.replace("[tails]\n", "[tails]\ndelta = 1e-9\n")
    tight = asyncio.run(_service(write_config(tight_text, "tight.toml")).increment_modulus(m_levels=[2, 3, 4]))
    shorter = False
    for full, cut in zip(default.variants, tight.variants):
        assert full.name == cut.name
        assert all(c <= f + 1e-15 for f, c in zip(full.estimates, cut.estimates))
        shorter = shorter or any(c < f for f, c in zip(full.estimates, cut.estimates))
    assert shorter
