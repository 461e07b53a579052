import textwrap
from pathlib import Path

import numpy as np
import pytest

from domain.noise import sample_path
from domain.trajectory import SolverConfig
from models.gbm import make_gbm
from models.heat import make_heat
from models.noise_specs import NoiseKind, NoiseSpec


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def gbm():
    return make_gbm(mu=0.1, a=0.5)


@pytest.fixture
def linear_noise() -> NoiseSpec:
    return NoiseSpec(kind=NoiseKind.LINEAR, coefficients=[0.4, 0.2, 0.1])


@pytest.fixture
def heat(linear_noise):
    return make_heat(8, 1.0, 1.0, linear_noise)


@pytest.fixture
def heat_zero_noise():
    return make_heat(4, 1.0, 1.0, NoiseSpec(kind=NoiseKind.ZERO, n_noise_modes=3))


@pytest.fixture
def path():
    return sample_path(seed=7, T=1.0, max_level=10, n_noise_modes=3)


@pytest.fixture
def fast_solver() -> SolverConfig:
    return SolverConfig(dt_level=8, substeps_per_varpi=8, m_store=8)


@pytest.fixture
def write_config(tmp_path):
    """Write a TOML experiment file and return its path."""

    def write(text: str, name: str = "experiment.toml") -> Path:
        target = tmp_path / name
        target.write_text(textwrap.dedent(text).lstrip(), encoding="utf-8")
        return target

    return write


SMALL_GBM = """
[experiment]
name = "small-gbm"
T = 1.0
m_levels = [2, 3, 4]
n_paths = 12
seed = 5

[model]
name = "gbm"

[model.params]
mu = 0.1
a = 0.5

[noise]
kind = "linear"
coefficients = [0.5]

[solver]
dt_level = 6
substeps_per_varpi = 4
m_store = 6

[identity]
m_levels = [2, 3]
n_seeds = 3

[tails]
m_levels = [1, 2, 3]
n_samples = 100

[probe]
n_trials = 50

[guard]
levels = [0.5, inf]
"""


@pytest.fixture
def small_gbm_config(write_config) -> Path:
    return write_config(SMALL_GBM)


@pytest.fixture
def small_gbm_text() -> str:
    return SMALL_GBM
