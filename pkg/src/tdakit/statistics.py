"""Bootstrap confidence bands and max-persistence parameter selection.

Every stochastic routine takes an integer ``seed``. Replicate ``j`` draws
from its own generator spawned from ``SeedSequence(seed)``, so results do
not depend on how replicates are scheduled across threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from tdakit.errors import InputError
from tdakit.estimators import EvaluationGrid, as_point_cloud, evaluate, evaluate_on_grid, make_grid
from tdakit.persistence import PersistenceDiagram, grid_diag_field


def _check_alpha(alpha: float) -> float:
    if not 0 < alpha < 1:
        raise InputError(f"alpha must lie in (0, 1), got {alpha}")
    return float(alpha)


def _check_replicates(B: int) -> int:
    if isinstance(B, bool) or int(B) != B or B < 1:
        raise InputError(f"B must be a positive integer, got {B}")
    return int(B)


def empirical_quantile(thetas, alpha: float) -> float:
    """Smallest ``q`` with at most a fraction ``alpha`` of replicates at or above it.

    For ``B`` replicates this is the ``ceil((1 - alpha) B)``-th order statistic.
    """
    thetas = np.sort(np.asarray(thetas, dtype=float))
    B = thetas.shape[0]
    # 1e-9 guards against (1 - alpha) * B landing a hair above an integer
    m = max(1, math.ceil((1.0 - alpha) * B - 1e-9))
    return float(thetas[m - 1])


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class ConfidenceBand:
    """Uniform band ``center -/+ width`` with ``width = q_alpha / sqrt(n)``."""

    width: float
    center: np.ndarray = field(repr=False)
    lower: np.ndarray = field(repr=False)
    upper: np.ndarray = field(repr=False)
    alpha: float
    B: int
    seed: int
    thetas: np.ndarray = field(repr=False)


def bootstrap_band(X, fun, grid, B: int = 100, alpha: float = 0.1, seed: int = 0, param=None,
                   threads: int = 1) -> ConfidenceBand:
    """Nonparametric bootstrap band for an estimator evaluated on ``grid``.

    Each replicate resamples ``X`` with replacement, re-evaluates the
    estimator and records ``sqrt(n) * max |f* - f|`` over the grid points.
    ``grid`` is an :class:`EvaluationGrid` or an array of query points.
    """
    X = as_point_cloud(X)
    B = _check_replicates(B)
    alpha = _check_alpha(alpha)
    Q = grid.points if isinstance(grid, EvaluationGrid) else np.asarray(grid, dtype=float)
    n = X.shape[0]
    center = evaluate(fun, X, Q, param)
    children = np.random.SeedSequence(seed).spawn(B)

    def replicate(j: int) -> float:
        idx = np.random.default_rng(children[j]).integers(0, n, size=n)
        boot = evaluate(fun, X[idx], Q, param)
        return math.sqrt(n) * float(np.max(np.abs(boot - center)))

    thetas = np.array(_map(replicate, range(B), threads))
    width = empirical_quantile(thetas, alpha) / math.sqrt(n)
    return ConfidenceBand(width, center, center - width, center + width, alpha, B, int(seed), thetas)


def significant_features(D: PersistenceDiagram, width: float) -> tuple[PersistenceDiagram, PersistenceDiagram]:
    """Split ``D`` into pairs with lifetime strictly above ``2 * width`` and the rest."""
    if not width >= 0:
        raise InputError(f"band width must be non-negative, got {width}")
    mask = D.lifetimes > 2.0 * width
    return D.select(mask), D.select(~mask)


@dataclass(frozen=True)
class MultiplierBand:
    """Band ``mean -/+ width`` for the mean of a set of summary curves."""

    mean: np.ndarray = field(repr=False)
    lower: np.ndarray = field(repr=False)
    upper: np.ndarray = field(repr=False)
    width: float
    alpha: float
    B: int
    seed: int


def multip_bootstrap(curves, B: int = 100, alpha: float = 0.05, seed: int = 0) -> MultiplierBand:
    """Multiplier bootstrap band for the mean of ``n`` curves (rows of ``curves``).

    Replicate ``j`` is ``max_t |sum_i xi_ij (c_i(t) - mean(t))| / sqrt(n)``
    with independent standard normal multipliers ``xi``.
    """
    try:
        C = np.asarray(curves, dtype=float)
    except ValueError:
        raise InputError("curves must all have the same length") from None
    if C.ndim != 2:
        raise InputError("curves must be an n x T matrix")
    n = C.shape[0]
    if n < 2:
        raise InputError(f"need at least 2 curves, got {n}")
    if not np.all(np.isfinite(C)):
        raise InputError("curve values must be finite")
    B = _check_replicates(B)
    alpha = _check_alpha(alpha)
    if np.all(C == C[0]):
        # avoid rounding in the mean when every curve is the same
        mean = C[0].copy()
    else:
        mean = C.mean(axis=0)
    centered = C - mean
    xi = np.random.default_rng(np.random.SeedSequence(seed)).standard_normal((B, n))
    thetas = np.max(np.abs(xi @ centered), axis=1) / math.sqrt(n)
    width = empirical_quantile(thetas, alpha) / math.sqrt(n)
    return MultiplierBand(mean, mean - width, mean + width, width, alpha, B, int(seed))


@dataclass(frozen=True)
class ParameterRecord:
    parameter: float
    diagram: PersistenceDiagram = field(repr=False)
    width: float
    n_significant: int
    total_significant: float


@dataclass(frozen=True)
class MaxPersistenceResult:
    """Per-parameter significance counts and the maximising parameter sets."""

    records: tuple[ParameterRecord, ...]
    argmax_n: tuple[float, ...]
    argmax_s: tuple[float, ...]

    @property
    def parameters(self) -> list[float]:
        return [r.parameter for r in self.records]

    @property
    def n_significant(self) -> list[int]:
        return [r.n_significant for r in self.records]

    @property
    def total_significant(self) -> list[float]:
        return [r.total_significant for r in self.records]


def max_persistence(fun, parameters: Sequence[float], X, lim, by: float, sublevel: bool = False,
                    B: int = 50, alpha: float = 0.1, seed: int = 0, maxdimension: int | None = None,
                    threads: int = 1, include_essential: bool = False) -> MaxPersistenceResult:
    """Score each smoothing parameter by its significant topological features.

    For each parameter the grid diagram and a bootstrap band of width ``w``
    are computed; ``N`` counts pairs with lifetime above ``2w`` and ``S``
    sums ``(lifetime - 2w)_+``. Essential classes are left out by default:
    their capped lifetime is the range of the field, which stays positive
    even for an almost constant estimate. All parameters share the same
    bootstrap seed.
    """
    params = [float(p) for p in parameters]
    if not params:
        raise InputError("parameters must not be empty")
    X = as_point_cloud(X)
    grid = make_grid(lim, by)
    records = []
    for h in params:
        field_ = evaluate_on_grid(fun, X, grid, h, threads)
        diag = grid_diag_field(field_, sublevel, maxdimension)
        band = bootstrap_band(X, fun, grid, B, alpha, seed, h, threads)
        threshold = 2.0 * band.width
        life = diag.lifetimes if include_essential else diag.lifetimes[~diag.essential]
        records.append(ParameterRecord(
            h, diag, band.width, int(np.sum(life > threshold)),
            float(np.sum(np.maximum(life - threshold, 0.0))),
        ))
    best_n = max(r.n_significant for r in records)
    best_s = max(r.total_significant for r in records)
    return MaxPersistenceResult(
        tuple(records),
        tuple(r.parameter for r in records if r.n_significant == best_n),
        tuple(r.parameter for r in records if r.total_significant == best_s),
    )
