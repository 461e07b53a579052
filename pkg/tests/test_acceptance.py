"""End-to-end runs of the shipped presets; each asserts the preset's verdict."""

import asyncio
from pathlib import Path

import pytest

from domain.experiment import load_experiment_config
from services.analysis import ExperimentService

PRESETS = Path(__file__).resolve().parent.parent / "presets"

pytestmark = pytest.mark.slow


def service_for(preset: str) -> ExperimentService:
    return ExperimentService(load_experiment_config(PRESETS / f"{preset}.toml"), threads=4, progress=False)


def test_gbm_converges_to_ito_oracle():
    report = asyncio.run(service_for("gbm_converge").convergence_study())
    assert report.reference == "oracle"
    assert report.verdict.monotone
    assert report.verdict.ratio_ok
    assert report.passed


def test_gbm_without_correction_misses_ito():
    report = asyncio.run(service_for("gbm_uncorrected").convergence_study())
    assert report.reference == "stratonovich-oracle"
    assert report.verdict.bias_ok
    assert report.passed


def test_heat_converges_to_fine_ito_reference():
    report = asyncio.run(service_for("heat_converge").convergence_study())
    assert report.reference == "ito"
    assert report.passed


def test_identity_preset_holds():
    report = asyncio.run(service_for("identity").identity())
    assert report.passed
    assert report.max_relative_residual <= report.tolerance


@pytest.mark.parametrize("preset", ["heat_probe", "gbm_converge", "burgers", "plaplace", "porous"])
def test_shipped_models_pass_probe(preset):
    service = service_for(preset)
    assert service.config.probe.n_trials == 1000
    assert service.config.probe.r_max == 10.0
    report = asyncio.run(service.probe())
    assert report.passed, report.failing()


@pytest.mark.parametrize("preset", ["heat_converge", "burgers"])
def test_energy_is_uniform_across_levels(preset):
    report = asyncio.run(service_for(preset).energy_study())
    assert report.passed


def test_gbm_increment_modulus_decays():
    report = asyncio.run(service_for("gbm_modulus").increment_modulus())
    assert report.passed


def test_tail_probabilities_vanish():
    report = asyncio.run(service_for("tails").tails())
    assert report.passed


@pytest.mark.parametrize("preset", ["gbm_skeleton", "heat_skeleton"])
def test_skeleton_convergence(preset):
    report = asyncio.run(service_for(preset).skeleton_convergence_study())
    assert report.passed
