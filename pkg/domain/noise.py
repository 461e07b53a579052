"""Dyadically refinable Brownian paths and the piecewise-constant Wong–Zakai derivative."""

from __future__ import annotations

import math
from functools import cached_property
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.exceptions import ArgumentError, ModeIndexError, TimeDomainError
from core.logging import get_logger

logger = get_logger(__name__)

SEED_LIMIT = 2 ** 64


def level_normals(seed: int, mode: int, level: int, size: int) -> np.ndarray:
    """Standard normals for one (seed, mode, level) block.

    The Philox key is the seed and the high counter words carry (mode, level),
    so the draw with index j is a pure function of (seed, mode, level, j).
    """
    counter = np.array([0, 0, mode, level], dtype=np.uint64)
    generator = np.random.Generator(np.random.Philox(key=seed, counter=counter))
    return generator.standard_normal(size)


class BrownianPath(BaseModel):
    """Finitely many independent scalar Brownian motions sampled on the finest dyadic grid."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    T: float = Field(..., gt=0.0, description="Horizon")
    max_level: int = Field(..., ge=1, description="Finest dyadic level L, grid step T/2^L")
    n_noise_modes: int = Field(..., ge=1, description="Number of scalar motions β_i")
    seed: int = Field(..., ge=0, lt=SEED_LIMIT, description="64-bit generator key")
    values: np.ndarray = Field(..., description="β_i at grid times kT/2^L, shape (modes, 2^L + 1)")

    @field_validator("values", mode="before")
    @classmethod
    def cast_values(cls, v: Any) -> np.ndarray:
        """Convert to an immutable float array."""
        arr = np.array(v, dtype=float, copy=True)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def validate_grid(self) -> BrownianPath:
        """Check shape, start at zero and finiteness."""
        expected = (self.n_noise_modes, 2 ** self.max_level + 1)
        if self.values.shape != expected:
            raise ValueError(f"Path values must have shape {expected}, got {self.values.shape}")
        if np.any(self.values[:, 0] != 0.0):
            raise ValueError("Brownian motions must start at 0")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("Path values must be finite")
        return self

    @property
    def n_steps(self) -> int:
        return 2 ** self.max_level

    def grid_times(self, level: int) -> np.ndarray:
        self._check_level(level)
        return np.linspace(0.0, self.T, 2 ** level + 1)

    def grid_values(self, level: int) -> np.ndarray:
        """β_i at the level-`level` grid, the exact subsampling of the finest grid."""
        self._check_level(level)
        stride = 2 ** (self.max_level - level)
        return self.values[:, ::stride]

    def increments(self, level: int) -> np.ndarray:
        """Δβ_i over each level-`level` interval, shape (modes, 2^level)."""
        return np.diff(self.grid_values(level), axis=1)

    def coarsen(self, level: int) -> BrownianPath:
        """The same ω restricted to a coarser dyadic grid."""
        return BrownianPath(
            T=self.T,
            max_level=level,
            n_noise_modes=self.n_noise_modes,
            seed=self.seed,
            values=self.grid_values(level),
        )

    def _check_level(self, level: int) -> None:
        if level < 0 or level > self.max_level:
            raise ArgumentError(f"Level {level} outside 0..{self.max_level}")


def sample_path(seed: int, T: float, max_level: int, n_noise_modes: int) -> BrownianPath:
    """Sample β_1, …, β_d on [0, T] by Lévy midpoint refinement down to level max_level."""
    if T <= 0.0:
        raise ArgumentError(f"Horizon T must be positive, got {T}")
    if max_level < 1:
        raise ArgumentError(f"max_level must be at least 1, got {max_level}")
    if n_noise_modes < 1:
        raise ArgumentError(f"n_noise_modes must be at least 1, got {n_noise_modes}")
    if not 0 <= seed < SEED_LIMIT:
        raise ArgumentError(f"Seed must be a 64-bit unsigned integer, got {seed}")

    n = 2 ** max_level
    values = np.zeros((n_noise_modes, n + 1))
    for mode in range(n_noise_modes):
        values[mode, n] = math.sqrt(T) * level_normals(seed, mode, 0, 1)[0]
        for level in range(1, max_level + 1):
            half = n >> level
            mids = np.arange(half, n, 2 * half)
            # Brownian-bridge midpoint: variance (interval length)/4
            std = math.sqrt(T / 2 ** (level + 1))
            bridge = 0.5 * (values[mode, mids - half] + values[mode, mids + half])
            values[mode, mids] = bridge + std * level_normals(seed, mode, level, mids.size)

    return BrownianPath(T=T, max_level=max_level, n_noise_modes=n_noise_modes, seed=seed, values=values)


class WzDriver(BaseModel):
    """Ẇ^m built from a stored path at time level m, ϖ = T/2^m."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    path: BrownianPath
    m: int = Field(..., ge=1, description="Wong–Zakai level")

    @model_validator(mode="after")
    def validate_level(self) -> WzDriver:
        """m cannot exceed the path's finest level."""
        if self.m > self.path.max_level:
            raise ValueError(f"Level m={self.m} exceeds path max_level={self.path.max_level}")
        return self

    @property
    def varpi(self) -> float:
        return self.path.T / 2 ** self.m

    @property
    def n_active_modes(self) -> int:
        """Modes entering the sum in Ẇ^m, capped at the path's noise dimension."""
        return min(self.m, self.path.n_noise_modes)

    @cached_property
    def rates(self) -> np.ndarray:
        """β̇_i^m on interval k (rows k = 0..2^m, the last row for t = T), all path modes."""
        grid = self.path.grid_values(self.m)
        rates = np.zeros((2 ** self.m + 1, self.path.n_noise_modes))
        rates[1:, :] = np.diff(grid, axis=1).T / self.varpi
        rates.setflags(write=False)
        return rates

    @cached_property
    def vectors(self) -> np.ndarray:
        """Ẇ^m on interval k with modes above n_active_modes zeroed."""
        vec = np.array(self.rates)
        vec[:, self.n_active_modes:] = 0.0
        vec.setflags(write=False)
        return vec

    def interval_index(self, t: float) -> int:
        """⌊t/ϖ⌋ for t in [0, T]."""
        if t < 0.0 or t > self.path.T:
            raise TimeDomainError(f"Time {t} outside [0, {self.path.T}]")
        return min(int(math.floor(t * 2 ** self.m / self.path.T)), 2 ** self.m)


def wz_derivative(driver: WzDriver, t: float, i: int) -> float:
    """β̇_i^m(t) = ϖ^{-1}[β_i(⌊t/ϖ⌋ϖ) − β_i((⌊t/ϖ⌋−1)ϖ)] with β_i(s) = 0 for s ≤ 0.

    Only grid values at indices ⌊t/ϖ⌋ and ⌊t/ϖ⌋ − 1 are read. Modes are 1-based.
    """
    if i < 1 or i > driver.path.n_noise_modes:
        raise ModeIndexError(f"Mode {i} outside 1..{driver.path.n_noise_modes}")
    k = driver.interval_index(t)
    if k == 0:
        return 0.0
    grid = driver.path.grid_values(driver.m)
    return float((grid[i - 1, k] - grid[i - 1, k - 1]) / driver.varpi)


def wz_vector(driver: WzDriver, t: float) -> np.ndarray:
    """Ẇ^m(t) as an n_noise_modes vector, zero beyond min(m, n_noise_modes)."""
    out = np.zeros(driver.path.n_noise_modes)
    for i in range(1, driver.n_active_modes + 1):
        out[i - 1] = wz_derivative(driver, t, i)
    return out
