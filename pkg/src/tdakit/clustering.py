"""Density cluster trees (lambda, alpha and kappa trees).

The density is estimated at every sample point and the superlevel sets
``{density > level}`` are swept from the highest level down. Connectivity
comes from the symmetric k-nearest-neighbour graph restricted to active
points and is tracked with a union-find structure. Components that appear
start leaves; components that merge end their branches and start a parent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from tdakit.errors import InputError
from tdakit.estimators import as_point_cloud, kde, knn_de

# rows per block when ranking neighbours by brute force
_NEIGHBOR_BLOCK = 512


def knn_graph(X, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Indices of and distances to the ``k`` nearest other points of each sample.

    Ties in distance are broken by sample index.
    """
    X = as_point_cloud(X)
    n = X.shape[0]
    if isinstance(k, bool) or int(k) != k or not 0 <= k < n:
        raise InputError(f"k must be an integer in [0, {n - 1}], got {k}")
    k = int(k)
    idx = np.empty((n, k), dtype=np.intp)
    dist = np.empty((n, k))
    for start in range(0, n, _NEIGHBOR_BLOCK):
        rows = np.arange(start, min(n, start + _NEIGHBOR_BLOCK))
        diff = X[rows, None, :] - X[None, :, :]
        sq = np.einsum("ijk,ijk->ij", diff, diff)
        sq[np.arange(len(rows)), rows] = np.inf
        order = np.argsort(sq, axis=1, kind="stable")[:, :k]
        idx[rows] = order
        dist[rows] = np.sqrt(np.take_along_axis(sq, order, axis=1))
    return idx, dist


def symmetric_adjacency(neighbors: np.ndarray) -> list[list[int]]:
    """Adjacency lists of the union of directed kNN edges."""
    n = neighbors.shape[0]
    adj: list[set[int]] = [set() for _ in range(n)]
    for i, row in enumerate(neighbors.tolist()):
        for j in row:
            adj[i].add(j)
            adj[j].add(i)
    return [sorted(a) for a in adj]


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, a: int) -> int:
        parent = self.parent
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return ra


@dataclass
class Branch:
    """One branch of the tree; it exists for levels in ``[lambda_birth, lambda_death)``.

    ``members`` are the sample ids in the branch's component at
    ``lambda_birth``, i.e. where the branch is largest. ``kappa_birth`` and
    ``kappa_death`` are the fractions of the sample in the branch's component
    just above ``lambda_birth`` and just above ``lambda_death``.
    """

    id: int
    parent: int | None
    children: list[int]
    lambda_birth: float
    lambda_death: float
    alpha_birth: float
    alpha_death: float
    kappa_birth: float
    kappa_death: float
    members: tuple[int, ...] = field(repr=False)
    own: tuple[int, ...] = field(repr=False, default=())


@dataclass
class ClusterTree:
    branches: list[Branch]
    density: np.ndarray = field(repr=False)
    k: int
    estimator: str

    @property
    def leaves(self) -> list[int]:
        """Leaf ids in dendrogram order (depth first, larger children first)."""
        return [b.id for b in self.branches if not b.children]

    @property
    def roots(self) -> list[int]:
        return [b.id for b in self.branches if b.parent is None]

    def alpha(self, level: float) -> float:
        """Fraction of the sample with estimated density above ``level``."""
        return float(np.mean(self.density > level))

    def components_at(self, level: float) -> dict[int, set[int]]:
        """Branches alive at ``level`` and their members with density above it."""
        out = {}
        for b in self.branches:
            if b.lambda_birth <= level < b.lambda_death:
                out[b.id] = {m for m in b.members if self.density[m] > level}
        return out


def _sweep(density: np.ndarray, adjacency: list[list[int]],
           on_level: Callable[[float, np.ndarray, _UnionFind], None] | None = None):
    """Sweep distinct density values from high to low, building raw branches.

    Returns a dict ``branch -> record`` with keys ``death`` (level at which the
    branch appears in the sweep), ``birth`` (level at which it merges, or
    None for roots), ``parent``, ``children`` and ``own`` (points that joined
    while it was the current branch of its component).
    """
    n = density.shape[0]
    uf = _UnionFind(n)
    active = np.zeros(n, dtype=bool)
    branch_of_root: dict[int, int] = {}
    root_of_branch: dict[int, int] = {}
    raw: dict[int, dict] = {}
    levels = np.unique(density)[::-1]
    order = np.argsort(-density, kind="stable")
    pos = 0
    for level in levels.tolist():
        start = pos
        while pos < n and density[order[pos]] == level:
            pos += 1
        new = order[start:pos].tolist()
        touched: dict[int, set[int]] = {}
        for p in new:
            touched[p] = {branch_of_root[uf.find(q)] for q in adjacency[p] if active[q]}
        for p in new:
            active[p] = True
        for p in new:
            for q in adjacency[p]:
                if active[q]:
                    uf.union(p, q)
        groups: dict[int, tuple[set[int], list[int]]] = {}
        for p in new:
            merged, pts = groups.setdefault(uf.find(p), (set(), []))
            merged |= touched[p]
            pts.append(p)
        for root, (merged, pts) in groups.items():
            if len(merged) == 1:
                (b,) = merged
                raw[b]["own"].extend(pts)
            else:
                b = len(raw)
                raw[b] = {"death": level, "birth": None, "parent": None,
                          "children": sorted(merged), "own": list(pts)}
                for c in merged:
                    raw[c]["birth"] = level
                    raw[c]["parent"] = b
            for c in merged:
                del branch_of_root[root_of_branch.pop(c)]
            branch_of_root[root] = b
            root_of_branch[b] = root
        if on_level is not None:
            on_level(level, active.copy(), uf)
    return raw


def cluster_tree(X, k: int, density: str = "knn", h: float | None = None) -> ClusterTree:
    """Build the cluster tree of a kNN or Gaussian kernel density estimate.

    The kNN density is :func:`~tdakit.estimators.knn_de` evaluated at the
    samples themselves (so each sample counts as its own first neighbour).
    The connectivity graph links ``i`` and ``j`` when either is among the
    other's ``k`` nearest *other* samples, at most ``n - 1`` of them.
    """
    X = as_point_cloud(X)
    n = X.shape[0]
    if isinstance(k, bool) or int(k) != k or not 1 <= k <= n:
        raise InputError(f"k must be an integer in [1, {n}], got {k}")
    neighbors, _ = knn_graph(X, min(int(k), n - 1))
    if density == "knn":
        dens = knn_de(X, X, int(k))
    elif density == "kde":
        if h is None:
            raise InputError("density='kde' requires a bandwidth h")
        dens = kde(X, X, h)
    else:
        raise InputError(f"density must be 'knn' or 'kde', got {density!r}")
    adjacency = symmetric_adjacency(neighbors)
    raw = _sweep(dens, adjacency)
    return _assemble(raw, dens, int(k), density)


def _assemble(raw: dict[int, dict], dens: np.ndarray, k: int, estimator: str) -> ClusterTree:
    n = dens.shape[0]

    sizes: dict[int, int] = {}
    full: dict[int, list[int]] = {}
    # children are always created before their parent
    for b in sorted(raw):
        pts = list(raw[b]["own"])
        for c in raw[b]["children"]:
            pts.extend(full[c])
        full[b] = sorted(pts)
        sizes[b] = len(pts)

    def key(b: int):
        return (-sizes[b], full[b][0])

    roots = sorted((b for b in raw if raw[b]["parent"] is None), key=key)
    # relabel depth first so ids and leaf order are deterministic
    new_id: dict[int, int] = {}
    stack = list(reversed(roots))
    order = []
    while stack:
        b = stack.pop()
        new_id[b] = len(order)
        order.append(b)
        stack.extend(sorted(raw[b]["children"], key=key, reverse=True))

    branches = []
    for b in order:
        rec = raw[b]
        birth = 0.0 if rec["parent"] is None else rec["birth"]
        death = rec["death"]
        children = sorted(rec["children"], key=key)
        branches.append(Branch(
            id=new_id[b],
            parent=None if rec["parent"] is None else new_id[rec["parent"]],
            children=[new_id[c] for c in children],
            lambda_birth=float(birth),
            lambda_death=float(death),
            alpha_birth=float(np.mean(dens > birth)),
            alpha_death=float(np.mean(dens > death)),
            kappa_birth=sizes[b] / n,
            kappa_death=sum(sizes[c] for c in children) / n,
            members=tuple(full[b]),
            own=tuple(sorted(rec["own"])),
        ))
    return ClusterTree(branches, dens, k, estimator)
