"""Bottleneck and p-Wasserstein distances between persistence diagrams.

Both use the L-infinity ground metric on the plane. A point ``(b, d)`` may be
matched to the diagonal at cost ``|d - b| / 2``. Essential classes are only
matched among themselves, by birth; diagrams with different numbers of
essential classes in the compared dimension are at infinite distance.
"""

from __future__ import annotations

import math
from collections import deque

import numpy as np
from scipy.optimize import linear_sum_assignment

from tdakit.errors import InputError
from tdakit.persistence import PersistenceDiagram


def _split(D: PersistenceDiagram, dimension: int) -> tuple[np.ndarray, np.ndarray]:
    sub = D.restrict(dimension)
    finite = ~sub.essential
    points = np.column_stack([sub.births[finite], sub.deaths[finite]])
    return points, np.sort(sub.births[sub.essential])


def _prepare(D1, D2, dimension):
    if not isinstance(D1, PersistenceDiagram) or not isinstance(D2, PersistenceDiagram):
        raise InputError("both arguments must be PersistenceDiagram instances")
    if D1.orientation != D2.orientation:
        raise InputError(f"orientation mismatch: {D1.orientation} vs {D2.orientation}")
    if isinstance(dimension, bool) or int(dimension) != dimension or dimension < 0:
        raise InputError(f"dimension must be a non-negative integer, got {dimension}")
    P, e1 = _split(D1, int(dimension))
    Q, e2 = _split(D2, int(dimension))
    return P, Q, e1, e2


def linf_costs(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Pairwise L-infinity distances between two sets of (birth, death) points."""
    if len(P) == 0 or len(Q) == 0:
        return np.zeros((len(P), len(Q)))
    return np.max(np.abs(P[:, None, :] - Q[None, :, :]), axis=2)


def diagonal_costs(P: np.ndarray) -> np.ndarray:
    """L-infinity distance from each point to the diagonal."""
    if len(P) == 0:
        return np.zeros(0)
    return np.abs(P[:, 1] - P[:, 0]) / 2.0


def _max_matching(adj: list[list[int]], n_right: int) -> int:
    """Hopcroft-Karp maximum bipartite matching size."""
    n_left = len(adj)
    match_l = [-1] * n_left
    match_r = [-1] * n_right
    size = 0
    while True:
        dist = [-1] * n_left
        queue = deque(u for u in range(n_left) if match_l[u] == -1)
        for u in queue:
            dist[u] = 0
        found = False
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                w = match_r[v]
                if w == -1:
                    found = True
                elif dist[w] == -1:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        if not found:
            return size
        for root in range(n_left):
            if match_l[root] != -1:
                continue
            # iterative DFS along the layered graph
            stack = [(root, iter(adj[root]))]
            path = []
            while stack:
                u, it = stack[-1]
                advanced = False
                for v in it:
                    w = match_r[v]
                    if w == -1:
                        path.append((u, v))
                        for a, b in path:
                            match_l[a] = b
                            match_r[b] = a
                        size += 1
                        stack = []
                        advanced = True
                        break
                    if dist[w] == dist[u] + 1:
                        path.append((u, v))
                        stack.append((w, iter(adj[w])))
                        advanced = True
                        break
                if not advanced and stack:
                    dist[u] = -1
                    stack.pop()
                    if path:
                        path.pop()


def _perfect_matching_within(r: float, C: np.ndarray, dp: np.ndarray, dq: np.ndarray) -> bool:
    n1, n2 = C.shape
    # left: P points, then diagonal copies of Q points
    # right: Q points, then diagonal copies of P points
    adj: list[list[int]] = []
    for i in range(n1):
        row = np.flatnonzero(C[i] <= r).tolist()
        if dp[i] <= r:
            row.append(n2 + i)
        adj.append(row)
    diag_right = list(range(n2, n2 + n1))
    for j in range(n2):
        row = [j] if dq[j] <= r else []
        adj.append(row + diag_right)
    return _max_matching(adj, n1 + n2) == n1 + n2


def _finite_bottleneck(P: np.ndarray, Q: np.ndarray) -> float:
    C = linf_costs(P, Q)
    dp, dq = diagonal_costs(P), diagonal_costs(Q)
    candidates = np.unique(np.concatenate([C.ravel(), dp, dq, [0.0]]))
    lo, hi = 0, len(candidates) - 1
    # the largest candidate always admits a perfect matching
    while lo < hi:
        mid = (lo + hi) // 2
        if _perfect_matching_within(candidates[mid], C, dp, dq):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])


def bottleneck(D1: PersistenceDiagram, D2: PersistenceDiagram, dimension: int = 0) -> float:
    """Bottleneck distance between the ``dimension`` parts of two diagrams.

    Returns ``inf`` when the diagrams have different numbers of essential
    classes in that dimension.
    """
    P, Q, e1, e2 = _prepare(D1, D2, dimension)
    if len(e1) != len(e2):
        return math.inf
    ess = float(np.max(np.abs(e1 - e2))) if len(e1) else 0.0
    return max(ess, _finite_bottleneck(P, Q))


def _finite_wasserstein_terms(P: np.ndarray, Q: np.ndarray, p: float) -> list[float]:
    """Costs ``c^p`` of an optimal matching that may use the diagonal."""
    n1, n2 = len(P), len(Q)
    if n1 + n2 == 0:
        return []
    size = n1 + n2
    cost = np.full((size, size), np.inf)
    cost[:n1, :n2] = linf_costs(P, Q) ** p
    cost[n1:, n2:] = 0.0
    cost[np.arange(n1), n2 + np.arange(n1)] = diagonal_costs(P) ** p
    cost[n1 + np.arange(n2), np.arange(n2)] = diagonal_costs(Q) ** p
    rows, cols = linear_sum_assignment(cost)
    return cost[rows, cols].tolist()


def wasserstein(D1: PersistenceDiagram, D2: PersistenceDiagram, p: float = 2.0, dimension: int = 0) -> float:
    """p-Wasserstein distance ``(sum cost^p)^(1/p)`` between the ``dimension`` parts.

    Returns ``inf`` when the essential class counts differ.
    """
    if not (p >= 1 and math.isfinite(p)):
        raise InputError(f"p must be a finite number >= 1, got {p}")
    P, Q, e1, e2 = _prepare(D1, D2, dimension)
    if len(e1) != len(e2):
        return math.inf
    # fsum is exact, so the value does not depend on argument or matching order
    total = math.fsum(_finite_wasserstein_terms(P, Q, p) + (np.abs(e1 - e2) ** p).tolist())
    return total ** (1.0 / p)
