"""Persistence landscapes and power-weighted silhouettes on a 1-d grid."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from tdakit.errors import InputError
from tdakit.persistence import PersistenceDiagram


@dataclass(frozen=True)
class SummaryCurve:
    """Values of a summary function at the sample points ``tseq``.

    ``empty`` is set when the curve was computed from no diagram points and
    is identically zero for that reason.
    """

    tseq: np.ndarray
    values: np.ndarray
    empty: bool = False

    def __post_init__(self):
        t = np.asarray(self.tseq, dtype=float).ravel()
        v = np.asarray(self.values, dtype=float).ravel()
        if t.shape != v.shape:
            raise InputError("tseq and values must have equal length")
        object.__setattr__(self, "tseq", t)
        object.__setattr__(self, "values", v)


def triangle(b: float, d: float, t):
    """Tent function of the pair ``(b, d)``: rises from ``b``, peaks at the midpoint, falls to ``d``."""
    if b > d:
        raise InputError(f"tent needs birth <= death, got ({b}, {d})")
    out = _tent(float(b), float(d), np.asarray(t, dtype=float))
    return float(out) if out.ndim == 0 else out


def _tent(b, d, t):
    mid = 0.5 * (b + d)
    return np.where((t >= b) & (t <= mid), t - b, np.where((t > mid) & (t <= d), d - t, 0.0))


def _intervals(D, dimension: int, include_essential: bool) -> np.ndarray:
    """(k, 2) array of (lower, upper) interval ends for one dimension."""
    if isinstance(D, PersistenceDiagram):
        sub = D.restrict(dimension)
        keep = np.ones(len(sub), dtype=bool) if include_essential else ~sub.essential
        b, d = sub.births[keep], sub.deaths[keep]
    else:
        rows = np.asarray(D, dtype=float)
        if rows.size == 0:
            return np.zeros((0, 2))
        if rows.ndim != 2 or rows.shape[1] not in (2, 3):
            raise InputError("diagram rows must be (birth, death) or (dimension, birth, death)")
        if rows.shape[1] == 3:
            rows = rows[rows[:, 0] == dimension, 1:]
        b, d = rows[:, 0], rows[:, 1]
    # superlevel pairs have birth > death; mirror to ordinary intervals
    return np.column_stack([np.minimum(b, d), np.maximum(b, d)])


def _tseq(tseq) -> np.ndarray:
    t = np.asarray(tseq, dtype=float).ravel()
    if t.size == 0:
        raise InputError("tseq must not be empty")
    if not np.all(np.isfinite(t)):
        raise InputError("tseq must be finite")
    return t


def _tents(iv: np.ndarray, t: np.ndarray) -> np.ndarray:
    return _tent(iv[:, 0:1], iv[:, 1:2], t[None, :])


def landscape(D, dimension: int = 1, KK: int = 1, tseq=None, include_essential: bool = True) -> SummaryCurve:
    """``KK``-th persistence landscape function of the ``dimension`` pairs.

    At each ``t`` the value is the ``KK``-th largest tent value, and zero if
    fewer than ``KK`` pairs are present.
    """
    if isinstance(KK, bool) or int(KK) != KK or KK < 1:
        raise InputError(f"KK must be a positive integer, got {KK}")
    t = _tseq(tseq)
    iv = _intervals(D, dimension, include_essential)
    n = len(iv)
    if n < KK:
        return SummaryCurve(t, np.zeros_like(t), empty=n == 0)
    tents = _tents(iv, t)
    return SummaryCurve(t, np.partition(tents, n - KK, axis=0)[n - KK])


def silhouette(D, p: float = 1.0, dimension: int = 1, tseq=None, include_essential: bool = True) -> SummaryCurve:
    """Power-weighted silhouette: tents averaged with weights ``|d - b|^p``.

    With no pairs in ``dimension`` the curve is all zeros and flagged ``empty``.
    """
    if not p > 0:
        raise InputError(f"p must be positive, got {p}")
    t = _tseq(tseq)
    iv = _intervals(D, dimension, include_essential)
    life = iv[:, 1] - iv[:, 0]
    # zero-lifetime pairs weigh nothing; dropping them keeps the BLAS
    # summation order, and so the rounding, independent of them
    iv, life = iv[life > 0], life[life > 0]
    if len(iv) == 0:
        return SummaryCurve(t, np.zeros_like(t), empty=True)
    # normalising by the longest lifetime keeps large p from overflowing
    w = (life / life.max()) ** p
    values = w @ _tents(iv, t) / w.sum()
    return SummaryCurve(t, values)
