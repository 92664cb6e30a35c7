"""Seeded synthetic samples used by the CLI and the experiment tests."""

from __future__ import annotations

import numpy as np

from tdakit.errors import InputError


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_circle(n: int, r: float = 1.0, offset=(0.0, 0.0), seed=None) -> np.ndarray:
    """``n`` points uniform on the circle of radius ``r`` centred at ``offset``.

    ``seed`` is an integer or an existing ``numpy.random.Generator``.
    """
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise InputError(f"n must be a positive integer, got {n}")
    if not r > 0:
        raise InputError(f"radius must be positive, got {r}")
    offset = np.broadcast_to(np.asarray(offset, dtype=float), (2,))
    theta = 2.0 * np.pi * _rng(seed).random(int(n))
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)]) + offset


def sample_box(n: int, lo: float, hi: float, dim: int = 2, seed=None) -> np.ndarray:
    """``n`` points uniform in the cube ``[lo, hi]^dim``."""
    return _rng(seed).uniform(lo, hi, size=(int(n), dim))


def sample_gaussian(n: int, mean, sd: float, seed=None) -> np.ndarray:
    """``n`` points from an isotropic normal with the given mean and standard deviation."""
    mean = np.asarray(mean, dtype=float)
    return _rng(seed).normal(mean, sd, size=(int(n), mean.shape[0]))
