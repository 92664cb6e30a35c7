"""Persistence pairs by mod-2 boundary matrix reduction, and diagrams.

Columns are stored as Python integers used as bitsets over the rows of the
next-lower dimension, so column addition is a single XOR and the pivot
(lowest one) is ``bit_length() - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from tdakit.errors import InputError
from tdakit.estimators import ScalarField, as_point_cloud, evaluate_on_grid, make_grid
from tdakit.filtration import Filtration, build_grid_filtration, build_rips_filtration

Orientation = Literal["sublevel", "superlevel"]


@dataclass(frozen=True)
class Pairing:
    """Result of a reduction: (birth, death) simplex indices and unpaired indices."""

    pairs: tuple[tuple[int, int], ...]
    essential: tuple[int, ...]


def _columns(filtration: Filtration):
    """Per-simplex dimension, rank within its dimension, and boundary bitset."""
    simplices = filtration.simplices
    index = {s: i for i, s in enumerate(simplices)}
    values = filtration.values
    n = len(simplices)
    dims = [len(s) - 1 for s in simplices]
    rank = [0] * n
    members: dict[int, list[int]] = {}
    for i, k in enumerate(dims):
        bucket = members.setdefault(k, [])
        rank[i] = len(bucket)
        bucket.append(i)
    boundary = [0] * n
    for i, s in enumerate(simplices):
        if len(s) < 2:
            continue
        col = 0
        for drop in range(len(s)):
            face = s[:drop] + s[drop + 1:]
            j = index.get(face)
            if j is None:
                raise InputError(f"face {face} of simplex {s} is missing from the filtration")
            if j > i or values[j] > values[i]:
                raise InputError(f"non-monotone filtration at simplex {s}")
            col |= 1 << rank[j]
        boundary[i] = col
    return dims, rank, members, boundary


def _reduce_column(col: int, pivots: dict[int, int]) -> int:
    while col:
        low = col.bit_length() - 1
        other = pivots.get(low)
        if other is None:
            break
        col ^= other
    return col


def reduce_boundary_matrix(filtration: Filtration, method: str = "twist") -> Pairing:
    """Pair simplices of ``filtration`` by reducing its boundary matrix over Z/2.

    ``method`` is ``"standard"`` (left-to-right column reduction) or
    ``"twist"`` (dimensions in decreasing order, clearing columns whose
    simplex is already known to be a birth). Both yield the same pairing.
    """
    if method not in ("standard", "twist"):
        raise InputError(f"unknown reduction method {method!r}")
    dims, rank, members, boundary = _columns(filtration)
    # pivots[k]: lowest row (rank in dim k-1) -> reduced column of dim k
    pivots: dict[int, dict[int, int]] = {k: {} for k in members}
    pairs: list[tuple[int, int]] = []

    if method == "standard":
        for j, col in enumerate(boundary):
            if not col:
                continue
            k = dims[j]
            col = _reduce_column(col, pivots[k])
            if col:
                low = col.bit_length() - 1
                pivots[k][low] = col
                pairs.append((members[k - 1][low], j))
    else:
        cleared: set[int] = set()
        for k in sorted(members, reverse=True):
            if k == 0:
                continue
            table = pivots[k]
            below = members[k - 1]
            for j in members[k]:
                if j in cleared:
                    continue
                col = _reduce_column(boundary[j], table)
                if col:
                    low = col.bit_length() - 1
                    table[low] = col
                    birth = below[low]
                    cleared.add(birth)
                    pairs.append((birth, j))
        pairs.sort(key=lambda p: p[1])

    paired = {i for p in pairs for i in p}
    essential = tuple(i for i in range(len(boundary)) if i not in paired)
    return Pairing(tuple(pairs), essential)


@dataclass(frozen=True)
class PersistenceDiagram:
    """Multiset of (dimension, birth, death) with orientation and cap.

    Essential classes never die inside the filtration; their death is
    reported as ``scale_cap`` and they are flagged in :attr:`essential`.
    """

    dimensions: np.ndarray
    births: np.ndarray
    deaths: np.ndarray
    essential: np.ndarray
    orientation: Orientation = "sublevel"
    scale_cap: float = float("inf")

    def __post_init__(self):
        dims = np.asarray(self.dimensions, dtype=np.int64).ravel()
        births = np.asarray(self.births, dtype=float).ravel()
        deaths = np.asarray(self.deaths, dtype=float).ravel()
        essential = np.asarray(self.essential, dtype=bool).ravel()
        if not (dims.shape == births.shape == deaths.shape == essential.shape):
            raise InputError("diagram columns must have equal length")
        if self.orientation not in ("sublevel", "superlevel"):
            raise InputError(f"orientation must be 'sublevel' or 'superlevel', got {self.orientation!r}")
        if np.any(dims < 0):
            raise InputError("diagram dimensions must be non-negative")
        finite = ~essential
        if self.orientation == "sublevel":
            bad = births > deaths
        else:
            bad = births < deaths
        if np.any(bad):
            raise InputError(f"pair orientation inconsistent with a {self.orientation} diagram")
        if np.any(finite & (births == deaths)):
            raise InputError("diagram contains zero-persistence pairs")
        for arr in (dims, births, deaths, essential):
            arr.setflags(write=False)
        object.__setattr__(self, "dimensions", dims)
        object.__setattr__(self, "births", births)
        object.__setattr__(self, "deaths", deaths)
        object.__setattr__(self, "essential", essential)
        object.__setattr__(self, "scale_cap", float(self.scale_cap))

    @classmethod
    def from_pairs(cls, pairs, orientation: Orientation = "sublevel", scale_cap: float = float("inf"),
                   essential=None) -> "PersistenceDiagram":
        """Build from ``(dimension, birth, death)`` rows."""
        rows = [tuple(p) for p in pairs]
        if any(len(r) != 3 for r in rows):
            raise InputError("pairs must be (dimension, birth, death) triples")
        if essential is None:
            essential = [False] * len(rows)
        return cls(
            np.array([r[0] for r in rows], dtype=np.int64),
            np.array([r[1] for r in rows], dtype=float),
            np.array([r[2] for r in rows], dtype=float),
            np.array(essential, dtype=bool),
            orientation,
            scale_cap,
        )

    def __len__(self) -> int:
        return int(self.dimensions.shape[0])

    def __eq__(self, other) -> bool:
        if not isinstance(other, PersistenceDiagram):
            return NotImplemented
        return (
            self.orientation == other.orientation
            and (self.scale_cap == other.scale_cap
                 or (np.isnan(self.scale_cap) and np.isnan(other.scale_cap)))
            and np.array_equal(self.dimensions, other.dimensions)
            and np.array_equal(self.births, other.births)
            and np.array_equal(self.deaths, other.deaths)
            and np.array_equal(self.essential, other.essential)
        )

    __hash__ = None

    @property
    def pairs(self) -> list[tuple[int, float, float]]:
        return list(zip(self.dimensions.tolist(), self.births.tolist(), self.deaths.tolist()))

    @property
    def lifetimes(self) -> np.ndarray:
        return np.abs(self.deaths - self.births)

    def select(self, mask) -> "PersistenceDiagram":
        mask = np.asarray(mask, dtype=bool)
        return PersistenceDiagram(
            self.dimensions[mask], self.births[mask], self.deaths[mask], self.essential[mask],
            self.orientation, self.scale_cap,
        )

    def restrict(self, dimension: int) -> "PersistenceDiagram":
        """Pairs of a single homological dimension."""
        return self.select(self.dimensions == dimension)

    def canonical(self) -> "PersistenceDiagram":
        """Same multiset with rows sorted by (dimension, essential, birth, death)."""
        order = np.lexsort((self.deaths, self.births, self.essential, self.dimensions))
        return PersistenceDiagram(
            self.dimensions[order], self.births[order], self.deaths[order], self.essential[order],
            self.orientation, self.scale_cap,
        )


def extract_diagram(pairing: Pairing, filtration: Filtration, scale_cap: float,
                    maxdimension: int | None = None) -> PersistenceDiagram:
    """Turn a pairing into a diagram on the original value scale.

    Finite pairs take the values of their two simplices and are dropped when
    those are equal. Unpaired simplices of dimension at most ``maxdimension``
    become essential classes with death ``scale_cap``. For negated
    (superlevel) filtrations values are negated back and ``scale_cap`` is
    taken to be on the original scale already.
    """
    values = filtration.values
    simplices = filtration.simplices
    sign = -1.0 if filtration.negated else 1.0
    if maxdimension is None:
        maxdimension = filtration.max_dimension
    rows: list[tuple[int, int, float, float, bool]] = []
    for b, d in pairing.pairs:
        dim = len(simplices[b]) - 1
        if dim > maxdimension or values[b] == values[d]:
            continue
        rows.append((dim, b, sign * values[b], sign * values[d], False))
    for b in pairing.essential:
        dim = len(simplices[b]) - 1
        if dim > maxdimension:
            continue
        rows.append((dim, b, sign * values[b], float(scale_cap), True))
    rows.sort(key=lambda r: (r[0], r[1]))
    return PersistenceDiagram(
        np.array([r[0] for r in rows], dtype=np.int64),
        np.array([r[2] for r in rows], dtype=float),
        np.array([r[3] for r in rows], dtype=float),
        np.array([r[4] for r in rows], dtype=bool),
        "superlevel" if filtration.negated else "sublevel",
        scale_cap,
    )


def grid_diag_field(field_: ScalarField, sublevel: bool = True, maxdimension: int | None = None,
                    method: str = "twist") -> PersistenceDiagram:
    """Persistence diagram of the sublevel (or superlevel) sets of a grid field.

    Essential classes are capped at the field maximum for sublevel sets and
    at the field minimum for superlevel sets.
    """
    d = field_.grid.dim
    if maxdimension is None:
        maxdimension = d - 1
    if not 0 <= maxdimension <= d:
        raise InputError(f"maxdimension must lie in [0, {d}] for a {d}-d grid")
    filt = build_grid_filtration(field_, sublevel)
    cap = float(np.max(field_.values) if sublevel else np.min(field_.values))
    return extract_diagram(reduce_boundary_matrix(filt, method), filt, cap, maxdimension)


def grid_diag(X, fun, lim, by: float, sublevel: bool = True, param=None,
              maxdimension: int | None = None, threads: int = 1) -> PersistenceDiagram:
    """Evaluate estimator ``fun`` on a grid over ``lim`` and compute its diagram.

    ``fun`` is an estimator id (``"dist"``, ``"dtm"``, ``"knn"``, ``"kde"``,
    ``"kdist"``) or one of the estimator functions; ``param`` is its
    smoothing parameter.
    """
    X = as_point_cloud(X)
    field_ = evaluate_on_grid(fun, X, make_grid(lim, by), param, threads)
    return grid_diag_field(field_, sublevel, maxdimension)


def rips_diag(data, maxdimension: int, maxscale: float, distance_matrix: bool = False,
              method: str = "twist") -> PersistenceDiagram:
    """Persistence diagram of the Rips filtration, essential classes capped at ``maxscale``."""
    filt = build_rips_filtration(data, maxdimension, maxscale, distance_matrix)
    return extract_diagram(reduce_boundary_matrix(filt, method), filt, float(maxscale), int(maxdimension))
