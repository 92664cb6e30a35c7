"""Simplicial filtrations from grid fields and from point clouds.

A :class:`Filtration` keeps its simplices in canonical order: by value, then
dimension, then lexicographic vertex tuple. Two constructions are provided:

* lower-star filtrations of a scalar field over the Freudenthal
  triangulation of its grid (``d!`` simplices per grid cell);
* Vietoris-Rips filtrations of a point cloud or a distance matrix.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from tdakit.errors import InputError
from tdakit.estimators import ScalarField, as_point_cloud

Simplex = tuple[int, ...]


@dataclass(frozen=True)
class Filtration:
    """Simplices with filtration values, stored in canonical order.

    ``order`` is the permutation that sorted the simplices as they were
    handed to :meth:`from_simplices`; ``negated`` records that values are
    the negation of the original function (superlevel filtrations).
    """

    simplices: tuple[Simplex, ...]
    values: np.ndarray = field(repr=False)
    order: np.ndarray = field(repr=False)
    negated: bool = False

    @classmethod
    def from_simplices(cls, simplices: Iterable[Sequence[int]], values, negated: bool = False,
                       validate: bool = True) -> "Filtration":
        simplices = [tuple(int(v) for v in s) for s in simplices]
        values = np.asarray(values, dtype=float).ravel()
        if len(simplices) != values.shape[0]:
            raise InputError("need exactly one filtration value per simplex")
        for s in simplices:
            if not s or any(a >= b for a, b in zip(s, s[1:])):
                raise InputError(f"simplex {s} must list strictly increasing vertex ids")
        if not np.all(np.isfinite(values)):
            raise InputError("filtration values must be finite")
        vals = values.tolist()
        order = sorted(range(len(simplices)), key=lambda i: (vals[i], len(simplices[i]), simplices[i]))
        filt = cls(
            tuple(simplices[i] for i in order),
            values[order],
            np.asarray(order, dtype=np.intp),
            negated,
        )
        if validate:
            filt.check()
        return filt

    def __len__(self) -> int:
        return len(self.simplices)

    @property
    def dimensions(self) -> np.ndarray:
        return np.fromiter((len(s) - 1 for s in self.simplices), dtype=np.intp, count=len(self))

    @property
    def max_dimension(self) -> int:
        return max((len(s) - 1 for s in self.simplices), default=-1)

    def check(self) -> None:
        """Raise :class:`InputError` unless faces exist and precede their cofaces."""
        index = {s: i for i, s in enumerate(self.simplices)}
        if len(index) != len(self.simplices):
            raise InputError("filtration contains duplicate simplices")
        values = self.values
        for i, s in enumerate(self.simplices):
            if len(s) < 2:
                continue
            for face in itertools.combinations(s, len(s) - 1):
                j = index.get(face)
                if j is None:
                    raise InputError(f"face {face} of simplex {s} is missing")
                if values[j] > values[i]:
                    raise InputError(
                        f"non-monotone filtration: face {face} has value {values[j]} > {values[i]} of {s}"
                    )

    def dump(self) -> str:
        """One simplex per line as ``value;v0,v1,...`` on the original value scale."""
        sign = -1.0 if self.negated else 1.0
        return "".join(
            f"{sign * v!r};{','.join(map(str, s))}\n" for v, s in zip(self.values.tolist(), self.simplices)
        )


def freudenthal_cells(shape: Sequence[int]) -> list[Simplex]:
    """Top-dimensional simplices of the Freudenthal triangulation of a grid.

    Vertex ids follow the grid's flattening with the first axis fastest. Each
    cell with base corner ``u`` contributes one simplex per axis permutation
    ``p``: ``u, u + e_p0, u + e_p0 + e_p1, ...``.
    """
    shape = tuple(int(s) for s in shape)
    d = len(shape)
    strides = [1]
    for s in shape[:-1]:
        strides.append(strides[-1] * s)
    walks = []
    for perm in itertools.permutations(range(d)):
        offsets = [0]
        for axis in perm:
            offsets.append(offsets[-1] + strides[axis])
        walks.append(offsets)
    tops = []
    for base in itertools.product(*(range(s - 1) for s in reversed(shape))):
        base_id = sum(b * st for b, st in zip(reversed(base), strides))
        for offsets in walks:
            tops.append(tuple(base_id + o for o in offsets))
    return tops


def grid_complex(shape: Sequence[int]) -> list[Simplex]:
    """All simplices (with every face) of the Freudenthal-triangulated grid."""
    shape = tuple(int(s) for s in shape)
    if any(s < 2 for s in shape):
        raise InputError(f"grid needs at least 2 samples per axis, got shape {shape}")
    d = len(shape)
    simplices: set[Simplex] = set()
    for top in freudenthal_cells(shape):
        for k in range(1, d + 2):
            simplices.update(itertools.combinations(top, k))
    return sorted(simplices, key=lambda s: (len(s), s))


def build_grid_filtration(field_: ScalarField, sublevel: bool = True) -> Filtration:
    """Lower-star filtration of a grid field.

    Each simplex takes the maximum of its vertex values. With
    ``sublevel=False`` the values are negated first, so that superlevel sets
    of the field become sublevel sets; the returned filtration is flagged
    ``negated``.
    """
    values = np.asarray(field_.values, dtype=float)
    if not sublevel:
        values = -values
    simplices = grid_complex(field_.shape)
    simplex_values = [max(values[v] for v in s) for s in simplices] if simplices else []
    return Filtration.from_simplices(simplices, simplex_values, negated=not sublevel, validate=False)


def as_distance_matrix(D, tol: float = 1e-12) -> np.ndarray:
    """Validate a square, symmetric, non-negative matrix with zero diagonal.

    Asymmetry up to ``tol`` is accepted; the returned matrix mirrors the
    lower triangle so it is exactly symmetric.
    """
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1] or D.shape[0] < 1:
        raise InputError(f"distance matrix must be square and non-empty, got shape {D.shape}")
    if not np.all(np.isfinite(D)):
        raise InputError("distance matrix entries must be finite")
    if np.any(D < 0):
        raise InputError("distance matrix has negative entries")
    if np.any(np.diag(D) != 0):
        raise InputError("distance matrix diagonal must be exactly zero")
    if np.max(np.abs(D - D.T)) > tol:
        raise InputError("distance matrix is not symmetric")
    return np.tril(D) + np.tril(D, -1).T


def pairwise_distances(X) -> np.ndarray:
    """Exactly symmetric Euclidean distance matrix of a point cloud."""
    X = as_point_cloud(X)
    diff = X[:, None, :] - X[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def rips_simplices(D: np.ndarray, max_simplex_dim: int, maxscale: float) -> tuple[list[Simplex], list[float]]:
    """Enumerate Rips simplices by incremental expansion over lower neighbours.

    A simplex is extended by every vertex that is a lower neighbour (smaller
    id, within ``maxscale``) of all its vertices. The value of a simplex is
    the largest pairwise distance among its vertices.
    """
    n = D.shape[0]
    within = D <= maxscale
    # bitmask of neighbours with a smaller id
    lower = [0] * n
    for i in range(n):
        for j in np.flatnonzero(within[i, :i]).tolist():
            lower[i] |= 1 << j
    simplices: list[Simplex] = []
    values: list[float] = []
    Dl = D.tolist()

    def expand(simplex: list[int], value: float, candidates: int) -> None:
        simplices.append(tuple(sorted(simplex)))
        values.append(value)
        if len(simplex) > max_simplex_dim:
            return
        while candidates:
            v = candidates.bit_length() - 1
            candidates &= ~(1 << v)
            new_value = value
            row = Dl[v]
            for u in simplex:
                if row[u] > new_value:
                    new_value = row[u]
            expand(simplex + [v], new_value, candidates & lower[v])

    for i in range(n):
        expand([i], 0.0, lower[i])
    return simplices, values


def build_rips_filtration(data, maxdimension: int, maxscale: float, distance_matrix: bool = False) -> Filtration:
    """Vietoris-Rips filtration up to simplices of dimension ``maxdimension + 1``.

    ``data`` is a point cloud, or an ``n x n`` distance matrix when
    ``distance_matrix`` is true. Point clouds go through their induced
    distance matrix, so both inputs give identical filtrations.
    """
    if isinstance(maxdimension, bool) or int(maxdimension) != maxdimension or maxdimension < 0:
        raise InputError(f"maxdimension must be a non-negative integer, got {maxdimension}")
    if not (maxscale > 0 and math.isfinite(maxscale)):
        raise InputError(f"maxscale must be positive and finite, got {maxscale}")
    D = as_distance_matrix(data) if distance_matrix else pairwise_distances(data)
    simplices, values = rips_simplices(D, int(maxdimension) + 1, float(maxscale))
    return Filtration.from_simplices(simplices, values, validate=False)
