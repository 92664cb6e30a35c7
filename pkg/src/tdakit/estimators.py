"""Distance functions and density estimators evaluated on query points.

All estimators take a point cloud ``X`` of shape ``(n, d)`` and a set of
query points of shape ``(m, d)`` and return an array of ``m`` values.
Query points usually come from :func:`make_grid`, whose flattening puts the
first axis fastest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from tdakit.errors import InputError

# kd-tree below or at this dimension, brute force above
KDTREE_MAX_DIM = 20

# query rows per block in the dense kernels; bounds the (block, n, d) buffer
_BLOCK_ELEMENTS = 2_000_000

# absorbs representation error in (hi - lo) / by, e.g. 3.2 / 0.065
_SEQ_FUZZ = 1e-10


def as_point_cloud(X, name: str = "X") -> np.ndarray:
    """Validate ``X`` and return it as a float array of shape (n, d)."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise InputError(f"{name} must be a 2-d array of points, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InputError(f"{name} must contain at least one point of dimension >= 1")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains NaN or infinite coordinates")
    return arr


def _as_queries(X: np.ndarray, queries) -> np.ndarray:
    Q = np.asarray(queries, dtype=float)
    if Q.ndim == 1:
        Q = Q.reshape(-1, X.shape[1]) if X.shape[1] > 1 else Q.reshape(-1, 1)
    if Q.ndim != 2 or Q.shape[1] != X.shape[1]:
        raise InputError(
            f"query dimension {Q.shape[-1] if Q.ndim else 0} does not match point dimension {X.shape[1]}"
        )
    if not np.all(np.isfinite(Q)):
        raise InputError("queries contain NaN or infinite coordinates")
    return Q


@dataclass(frozen=True)
class EvaluationGrid:
    """Rectilinear grid with a common step along every axis.

    Axis ``k`` holds ``lo_k, lo_k + by, ...`` up to the largest value not
    exceeding ``hi_k``. :attr:`points` lists grid points with the first
    axis varying fastest.
    """

    lim: tuple[tuple[float, float], ...]
    by: float

    def __post_init__(self):
        lim = tuple((float(lo), float(hi)) for lo, hi in self.lim)
        object.__setattr__(self, "lim", lim)
        object.__setattr__(self, "by", float(self.by))
        if not lim:
            raise InputError("grid needs at least one axis")
        if not self.by > 0 or not math.isfinite(self.by):
            raise InputError(f"grid step must be positive, got {self.by}")
        for lo, hi in lim:
            if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
                raise InputError(f"invalid axis limits ({lo}, {hi}); need lo < hi")
            if self.by > hi - lo:
                raise InputError(f"step {self.by} exceeds axis range ({lo}, {hi})")

    @property
    def dim(self) -> int:
        return len(self.lim)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(int(math.floor((hi - lo) / self.by + _SEQ_FUZZ)) + 1 for lo, hi in self.lim)

    @property
    def axes(self) -> list[np.ndarray]:
        return [lo + self.by * np.arange(s) for (lo, _), s in zip(self.lim, self.shape)]

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def points(self) -> np.ndarray:
        # indexing="ij" then Fortran ravel puts axis 0 fastest
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.column_stack([m.ravel(order="F") for m in mesh])


def make_grid(lim: Sequence[Sequence[float]], by: float) -> EvaluationGrid:
    """Build an :class:`EvaluationGrid` from per-axis ``(lo, hi)`` pairs."""
    return EvaluationGrid(tuple(tuple(pair) for pair in lim), by)


@dataclass(frozen=True)
class ScalarField:
    """Function values on an :class:`EvaluationGrid`, in grid point order."""

    grid: EvaluationGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        if values.shape[0] != self.grid.size:
            raise InputError(
                f"field has {values.shape[0]} values but grid has {self.grid.size} points"
            )
        if not np.all(np.isfinite(values)):
            raise InputError("field values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.grid.shape


def unit_ball_volume(d: int) -> float:
    """Volume of the Euclidean unit ball in dimension ``d``."""
    return math.exp(0.5 * d * math.log(math.pi) - math.lgamma(0.5 * d + 1.0))


def _blocks(m: int, n: int, d: int):
    step = max(1, _BLOCK_ELEMENTS // max(1, n * d))
    for start in range(0, m, step):
        yield slice(start, min(m, start + step))


def _sq_dists(Q: np.ndarray, X: np.ndarray) -> np.ndarray:
    diff = Q[:, None, :] - X[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def knn_distances(X: np.ndarray, Q: np.ndarray, k: int, threads: int = 1) -> np.ndarray:
    """Sorted distances from each query to its ``k`` nearest samples, shape (m, k)."""
    n, d = X.shape
    if d <= KDTREE_MAX_DIM:
        dist, _ = cKDTree(X).query(Q, k=k, workers=threads)
        return np.asarray(dist, dtype=float).reshape(Q.shape[0], k)
    out = np.empty((Q.shape[0], k))
    for sl in _blocks(Q.shape[0], n, d):
        sq = _sq_dists(Q[sl], X)
        part = np.partition(sq, k - 1, axis=1)[:, :k] if k < n else sq
        out[sl] = np.sqrt(np.sort(part, axis=1))
    return out


def dist_fct(X, queries, threads: int = 1) -> np.ndarray:
    """Euclidean distance from each query point to the nearest sample."""
    X = as_point_cloud(X)
    Q = _as_queries(X, queries)
    return knn_distances(X, Q, 1, threads)[:, 0]


def dtm(X, queries, m0: float, threads: int = 1) -> np.ndarray:
    """Empirical distance to a measure with mass parameter ``m0``.

    Root mean squared distance to the ``ceil(m0 * n)`` nearest samples.
    """
    X = as_point_cloud(X)
    Q = _as_queries(X, queries)
    if not 0 < m0 <= 1:
        raise InputError(f"m0 must lie in (0, 1], got {m0}")
    k = max(1, math.ceil(m0 * X.shape[0] - 1e-12))
    dist = knn_distances(X, Q, k, threads)
    return np.sqrt(np.mean(dist**2, axis=1))


def knn_de(X, queries, k: int, threads: int = 1) -> np.ndarray:
    """k-nearest-neighbour density estimate ``k / (n v_d r_k^d)``.

    Returns ``inf`` where the k-th neighbour distance is zero, i.e. where the
    query coincides with at least ``k`` samples.
    """
    X = as_point_cloud(X)
    Q = _as_queries(X, queries)
    n, d = X.shape
    if isinstance(k, bool) or int(k) != k or not 1 <= k <= n:
        raise InputError(f"k must be an integer in [1, {n}], got {k}")
    k = int(k)
    r = knn_distances(X, Q, k, threads)[:, -1]
    denom = n * unit_ball_volume(d) * r**d
    with np.errstate(divide="ignore"):
        return np.where(denom > 0, k / np.where(denom > 0, denom, 1.0), np.inf)


def _gaussian_row_means(X: np.ndarray, Q: np.ndarray, h: float) -> np.ndarray:
    n, d = X.shape
    out = np.empty(Q.shape[0])
    scale = -0.5 / (h * h)
    for sl in _blocks(Q.shape[0], n, d):
        out[sl] = np.exp(_sq_dists(Q[sl], X) * scale).sum(axis=1) / n
    return out


def _check_bandwidth(h: float) -> float:
    if not (isinstance(h, (int, float, np.floating, np.integer)) and h > 0 and math.isfinite(h)):
        raise InputError(f"bandwidth h must be positive and finite, got {h}")
    return float(h)


def kde(X, queries, h: float) -> np.ndarray:
    """Gaussian kernel density estimate with bandwidth ``h``."""
    X = as_point_cloud(X)
    Q = _as_queries(X, queries)
    h = _check_bandwidth(h)
    d = X.shape[1]
    return _gaussian_row_means(X, Q, h) / (math.sqrt(2.0 * math.pi) * h) ** d


def kernel_dist(X, queries, h: float) -> np.ndarray:
    """Kernel distance between the empirical measure and a point mass at each query."""
    X = as_point_cloud(X)
    Q = _as_queries(X, queries)
    h = _check_bandwidth(h)
    self_term = _gaussian_row_means(X, X, h).mean()
    cross = _gaussian_row_means(X, Q, h)
    return np.sqrt(np.maximum(self_term + 1.0 - 2.0 * cross, 0.0))


# estimator id -> (function, name of its smoothing parameter or None)
ESTIMATORS: dict[str, tuple[Callable[..., np.ndarray], str | None]] = {
    "dist": (dist_fct, None),
    "dtm": (dtm, "m0"),
    "knn": (knn_de, "k"),
    "kde": (kde, "h"),
    "kdist": (kernel_dist, "h"),
}


def resolve_estimator(fun) -> tuple[Callable[..., np.ndarray], str | None]:
    """Look up an estimator by id, or accept one of the estimator functions."""
    if callable(fun):
        for f, param in ESTIMATORS.values():
            if f is fun:
                return f, param
        return fun, None
    try:
        return ESTIMATORS[fun]
    except KeyError:
        raise InputError(f"unknown estimator {fun!r}; choose from {sorted(ESTIMATORS)}") from None


def evaluate(fun, X, queries, param=None, threads: int = 1) -> np.ndarray:
    """Evaluate estimator ``fun`` with its single smoothing parameter."""
    f, name = resolve_estimator(fun)
    if name is None:
        if f is dist_fct:
            return f(X, queries, threads=threads)
        return f(X, queries) if param is None else f(X, queries, param)
    if param is None:
        raise InputError(f"estimator requires parameter {name!r}")
    if f in (dtm, knn_de):
        return f(X, queries, param, threads=threads)
    return f(X, queries, param)


def evaluate_on_grid(fun, X, grid: EvaluationGrid, param=None, threads: int = 1) -> ScalarField:
    """Evaluate an estimator on every grid point and wrap the result."""
    X = as_point_cloud(X)
    if grid.dim != X.shape[1]:
        raise InputError(f"grid has {grid.dim} axes but points have dimension {X.shape[1]}")
    return ScalarField(grid, evaluate(fun, X, grid.points, param, threads))
