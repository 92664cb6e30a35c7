"""Static SVG figures: diagrams, barcodes, curves, bands, fields and dendrograms.

Output is deterministic: coordinates are printed with 9 significant digits
and elements appear in input order. Marks carry ``data-x``/``data-y``
attributes holding their data coordinates.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

from tdakit.clustering import ClusterTree
from tdakit.errors import InputError
from tdakit.estimators import ScalarField
from tdakit.persistence import PersistenceDiagram

DIM_COLORS = ["#000000", "#d62728", "#1f77b4", "#2ca02c", "#9467bd"]
BAND_FILL = "#f4b6c2"


def _f(x: float) -> str:
    return f"{float(x):.9g}"


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


class Canvas:
    """Minimal SVG canvas mapping a data rectangle onto a plotting area."""

    def __init__(self, xlim, ylim, width: int = 480, height: int = 480, margin: int = 56, title: str = ""):
        x0, x1 = map(float, xlim)
        y0, y1 = map(float, ylim)
        if x1 <= x0:
            x0, x1 = x0 - 0.5, x0 + 0.5
        if y1 <= y0:
            y0, y1 = y0 - 0.5, y0 + 0.5
        self.xlim, self.ylim = (x0, x1), (y0, y1)
        self.width, self.height, self.margin = width, height, margin
        self.title = title
        self.body: list[str] = []

    def px(self, x: float) -> float:
        x0, x1 = self.xlim
        return self.margin + (x - x0) / (x1 - x0) * (self.width - 2 * self.margin)

    def py(self, y: float) -> float:
        y0, y1 = self.ylim
        return self.height - self.margin - (y - y0) / (y1 - y0) * (self.height - 2 * self.margin)

    def add(self, element: str) -> None:
        self.body.append(element)

    def line(self, x0, y0, x1, y1, stroke="#000000", width=1.0, cls="") -> None:
        c = f' class="{cls}"' if cls else ""
        self.add(f'<line{c} x1="{_f(self.px(x0))}" y1="{_f(self.py(y0))}" x2="{_f(self.px(x1))}" '
                 f'y2="{_f(self.py(y1))}" stroke="{stroke}" stroke-width="{_f(width)}"/>')

    def polyline(self, xs, ys, stroke="#1f77b4", width=1.5, cls="curve") -> None:
        pts = " ".join(f"{_f(self.px(x))},{_f(self.py(y))}" for x, y in zip(xs, ys))
        self.add(f'<polyline class="{cls}" points="{pts}" fill="none" stroke="{stroke}" stroke-width="{_f(width)}"/>')

    def polygon(self, xs, ys, fill=BAND_FILL, cls="band", extra="") -> None:
        pts = " ".join(f"{_f(self.px(x))},{_f(self.py(y))}" for x, y in zip(xs, ys))
        self.add(f'<polygon class="{cls}" points="{pts}" fill="{fill}" stroke="none"{extra}/>')

    def dot(self, x, y, color="#000000", r=3.0, cls="point") -> None:
        self.add(f'<circle class="{cls}" cx="{_f(self.px(x))}" cy="{_f(self.py(y))}" r="{_f(r)}" '
                 f'fill="{color}" data-x="{_f(x)}" data-y="{_f(y)}"/>')

    def open_triangle(self, x, y, color="#d62728", s=4.0, cls="point") -> None:
        cx, cy = self.px(x), self.py(y)
        pts = f"{_f(cx)},{_f(cy - s)} {_f(cx - s)},{_f(cy + s)} {_f(cx + s)},{_f(cy + s)}"
        self.add(f'<polygon class="{cls}" points="{pts}" fill="none" stroke="{color}" stroke-width="1.5" '
                 f'data-x="{_f(x)}" data-y="{_f(y)}"/>')

    def diamond(self, x, y, color="#1f77b4", s=4.0, cls="point") -> None:
        cx, cy = self.px(x), self.py(y)
        pts = f"{_f(cx)},{_f(cy - s)} {_f(cx - s)},{_f(cy)} {_f(cx)},{_f(cy + s)} {_f(cx + s)},{_f(cy)}"
        self.add(f'<polygon class="{cls}" points="{pts}" fill="none" stroke="{color}" stroke-width="1.5" '
                 f'data-x="{_f(x)}" data-y="{_f(y)}"/>')

    def rect(self, x0, y0, x1, y1, fill, cls="cell") -> None:
        px0, px1 = sorted((self.px(x0), self.px(x1)))
        py0, py1 = sorted((self.py(y0), self.py(y1)))
        self.add(f'<rect class="{cls}" x="{_f(px0)}" y="{_f(py0)}" width="{_f(px1 - px0)}" '
                 f'height="{_f(py1 - py0)}" fill="{fill}"/>')

    def axes(self, xlabel: str = "", ylabel: str = "") -> None:
        x0, x1 = self.xlim
        y0, y1 = self.ylim
        m, w, h = self.margin, self.width, self.height
        self.add(f'<rect class="frame" x="{m}" y="{m}" width="{w - 2 * m}" height="{h - 2 * m}" '
                 f'fill="none" stroke="#000000"/>')
        for t in _nice_ticks(x0, x1):
            px = self.px(t)
            self.add(f'<line class="tick" x1="{_f(px)}" y1="{h - m}" x2="{_f(px)}" y2="{h - m + 4}" stroke="#000000"/>')
            self.add(f'<text x="{_f(px)}" y="{h - m + 16}" font-size="10" text-anchor="middle">{_f(t)}</text>')
        for t in _nice_ticks(y0, y1):
            py = self.py(t)
            self.add(f'<line class="tick" x1="{m - 4}" y1="{_f(py)}" x2="{m}" y2="{_f(py)}" stroke="#000000"/>')
            self.add(f'<text x="{m - 6}" y="{_f(py + 3)}" font-size="10" text-anchor="end">{_f(t)}</text>')
        if xlabel:
            self.add(f'<text x="{w / 2}" y="{h - 12}" font-size="12" text-anchor="middle">{escape(xlabel)}</text>')
        if ylabel:
            self.add(f'<text x="14" y="{h / 2}" font-size="12" text-anchor="middle" '
                     f'transform="rotate(-90 14 {h / 2})">{escape(ylabel)}</text>')

    def render(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
                f'viewBox="0 0 {self.width} {self.height}">\n'
                f'<rect width="{self.width}" height="{self.height}" fill="#ffffff"/>\n')
        title = (f'<text x="{self.width / 2}" y="24" font-size="14" text-anchor="middle">'
                 f'{escape(self.title)}</text>\n') if self.title else ""
        return head + title + "\n".join(self.body) + "\n</svg>\n"


def _mark(canvas: Canvas, dim: int, x: float, y: float) -> None:
    color = DIM_COLORS[dim % len(DIM_COLORS)]
    if dim == 0:
        canvas.dot(x, y, color, cls="point dim0")
    elif dim == 1:
        canvas.open_triangle(x, y, color, cls="point dim1")
    else:
        canvas.diamond(x, y, color, cls=f"point dim{dim}")


def _value_range(D: PersistenceDiagram) -> tuple[float, float]:
    vals = np.concatenate([D.births, D.deaths])
    vals = vals[np.isfinite(vals)]
    if vals.size == 0:
        return 0.0, 1.0
    lo, hi = float(min(vals.min(), 0.0)), float(vals.max())
    return lo, hi if hi > lo else lo + 1.0


def plot_diagram(D: PersistenceDiagram, band: float | None = None, title: str = "") -> str:
    """Birth/death scatter with the diagonal and an optional band along it.

    The band is a strip of vertical extent ``band`` next to the diagonal, on
    the side where the diagram's points lie.
    """
    lo, hi = _value_range(D)
    c = Canvas((lo, hi), (lo, hi), title=title)
    if band:
        sign = -1.0 if D.orientation == "superlevel" else 1.0
        c.polygon([lo, hi, hi, lo], [lo, hi, hi + sign * band, lo + sign * band],
                  extra=f' data-band="{_f(band)}"')
    c.axes("Birth", "Death")
    c.line(lo, lo, hi, hi, cls="diagonal")
    for dim, b, d in D.pairs:
        _mark(c, dim, b, d)
    return c.render()


def plot_rotated(D: PersistenceDiagram, band: float | None = None, title: str = "") -> str:
    """Diagram in (midpoint, half-lifetime) coordinates, band as a horizontal strip."""
    mids = (D.births + D.deaths) / 2.0
    halves = np.abs(D.deaths - D.births) / 2.0
    xlo, xhi = (float(mids.min()), float(mids.max())) if len(D) else (0.0, 1.0)
    yhi = max(float(halves.max()) if len(D) else 1.0, band or 0.0)
    pad = 0.05 * max(xhi - xlo, yhi, 1e-12)
    c = Canvas((xlo - pad, xhi + pad), (0.0, yhi + pad), title=title)
    if band:
        c.polygon([xlo - pad, xhi + pad, xhi + pad, xlo - pad], [0, 0, band, band],
                  extra=f' data-band="{_f(band)}"')
    c.axes("(Birth + Death) / 2", "|Death - Birth| / 2")
    for dim, m, h in zip(D.dimensions.tolist(), mids.tolist(), halves.tolist()):
        _mark(c, dim, m, h)
    return c.render()


def plot_barcode(D: PersistenceDiagram, title: str = "") -> str:
    """One horizontal bar per pair, grouped by dimension."""
    lo, hi = _value_range(D)
    n = max(len(D), 1)
    c = Canvas((lo, hi), (0, n + 1), title=title)
    c.axes("Value", "")
    order = sorted(range(len(D)), key=lambda i: (int(D.dimensions[i]), min(D.births[i], D.deaths[i])))
    for row, i in enumerate(order, start=1):
        dim = int(D.dimensions[i])
        c.line(D.births[i], row, D.deaths[i], row, stroke=DIM_COLORS[dim % len(DIM_COLORS)],
               width=2.0, cls=f"bar dim{dim}")
    return c.render()


def plot_curve(tseq, values, lower=None, upper=None, title: str = "", ylabel: str = "") -> str:
    """Line plot of a summary curve, with an optional shaded band."""
    t = np.asarray(tseq, dtype=float)
    v = np.asarray(values, dtype=float)
    ys = [v] + [np.asarray(a, dtype=float) for a in (lower, upper) if a is not None]
    ylo = min(0.0, min(float(a.min()) for a in ys))
    yhi = max(float(a.max()) for a in ys)
    c = Canvas((float(t.min()), float(t.max())), (ylo, yhi if yhi > ylo else ylo + 1.0), title=title)
    if lower is not None and upper is not None:
        c.polygon(np.concatenate([t, t[::-1]]), np.concatenate([np.asarray(lower), np.asarray(upper)[::-1]]))
    c.axes("t", ylabel)
    c.polyline(t, v)
    return c.render()


def _heat(u: float) -> str:
    u = min(max(u, 0.0), 1.0)
    r = int(round(255 * min(1.0, 2 * u)))
    g = int(round(255 * max(0.0, 2 * u - 1)))
    b = int(round(64 * (1 - u)))
    return f"#{r:02x}{g:02x}{b:02x}"


def plot_field(field_: ScalarField, title: str = "") -> str:
    """Flat heat map of a 2-d field (line plot for 1-d fields)."""
    grid = field_.grid
    if grid.dim == 1:
        return plot_curve(grid.axes[0], field_.values, title=title, ylabel="value")
    if grid.dim != 2:
        raise InputError("field plots support 1-d and 2-d grids only")
    xs, ys = grid.axes
    vals = field_.values.reshape(grid.shape, order="F")
    vlo, vhi = float(vals.min()), float(vals.max())
    span = vhi - vlo if vhi > vlo else 1.0
    half = grid.by / 2
    c = Canvas((xs[0] - half, xs[-1] + half), (ys[0] - half, ys[-1] + half), title=title)
    for i, x in enumerate(xs.tolist()):
        for j, y in enumerate(ys.tolist()):
            c.rect(x - half, y - half, x + half, y + half, _heat((vals[i, j] - vlo) / span))
    c.axes("x1", "x2")
    return c.render()


def _dendrogram_coords(tree: ClusterTree, kind: str) -> dict[int, tuple[float, float]]:
    """Vertical extent (bottom, top) of each branch for the chosen tree type."""
    if kind == "lambda":
        finite = [v for b in tree.branches for v in (b.lambda_birth, b.lambda_death) if math.isfinite(v)]
        cap = 1.05 * max(finite) if finite else 1.0
        return {b.id: (b.lambda_birth, min(b.lambda_death, cap)) for b in tree.branches}
    if kind == "alpha":
        return {b.id: (1.0 - b.alpha_birth, 1.0 - b.alpha_death) for b in tree.branches}
    if kind == "kappa":
        by_id = {b.id: b for b in tree.branches}
        out: dict[int, tuple[float, float]] = {}
        for b in tree.branches:  # parents precede children
            bottom = 0.0 if b.parent is None else out[b.parent][1]
            out[b.id] = (bottom, bottom + by_id[b.id].kappa_birth - by_id[b.id].kappa_death)
        return out
    raise InputError(f"dendrogram type must be lambda, alpha or kappa, got {kind!r}")


def plot_dendrogram(tree: ClusterTree, kind: str = "lambda", title: str = "") -> str:
    """Cluster tree dendrogram; leaves spaced evenly in leaf order."""
    ys = _dendrogram_coords(tree, kind)
    by_id = {b.id: b for b in tree.branches}
    xpos: dict[int, float] = {}
    for i, leaf in enumerate(tree.leaves):
        xpos[leaf] = float(i + 1)
    for b in reversed(tree.branches):  # children precede parents in reverse order
        if b.children:
            xpos[b.id] = float(np.mean([xpos[c] for c in b.children]))
    top = max((v[1] for v in ys.values()), default=1.0)
    c = Canvas((0.0, len(tree.leaves) + 1.0), (0.0, top if top > 0 else 1.0), title=title)
    c.axes("", {"lambda": "lambda", "alpha": "1 - alpha", "kappa": "kappa"}[kind])
    for b in tree.branches:
        lo, hi = ys[b.id]
        c.line(xpos[b.id], lo, xpos[b.id], hi, stroke="#000000", width=2.0, cls=f"branch b{b.id}")
        if b.children:
            xs = [xpos[ch] for ch in b.children]
            c.line(min(xs), hi, max(xs), hi, stroke="#000000", width=1.0, cls="split")
    del by_id
    return c.render()


def plot_max_persistence(result, title: str = "") -> str:
    """Lifetimes per smoothing parameter with the ``2 * width`` significance band."""
    params = np.array(result.parameters, dtype=float)
    lifes = [r.diagram.lifetimes for r in result.records]
    widths = np.array([2.0 * r.width for r in result.records])
    top = max([float(l.max()) for l in lifes if l.size] + [float(widths.max())])
    step = float(np.min(np.diff(params))) if len(params) > 1 else 1.0
    c = Canvas((params.min() - step / 2, params.max() + step / 2), (0.0, top * 1.05), title=title)
    half = step * 0.3
    xs, ys = [], []
    for p, w in zip(params.tolist(), widths.tolist()):
        xs += [p - half, p + half]
        ys += [w, w]
    c.polygon(xs + xs[::-1], ys + [0.0] * len(ys))
    c.axes("parameter", "persistence")
    for rec in result.records:
        for dim, life in zip(rec.diagram.dimensions.tolist(), rec.diagram.lifetimes.tolist()):
            _mark(c, dim, rec.parameter, life)
    return c.render()


PLOT_KINDS = ("diagram", "barcode", "rotated", "landscape", "silhouette", "band", "dendrogram", "field")


def plot(kind: str, data, **options) -> str:
    """Dispatch to the plot function for ``kind``."""
    title = options.get("title", "")
    if kind == "diagram":
        return plot_diagram(data, options.get("band"), title)
    if kind == "rotated":
        return plot_rotated(data, options.get("band"), title)
    if kind == "barcode":
        return plot_barcode(data, title)
    if kind in ("landscape", "silhouette"):
        return plot_curve(data.tseq, data.values, title=title, ylabel=kind)
    if kind == "band":
        return plot_curve(data["t"], data["mean"], data["lower"], data["upper"], title=title)
    if kind == "dendrogram":
        return plot_dendrogram(data, options.get("type", "lambda"), title)
    if kind == "field":
        return plot_field(data, title)
    raise InputError(f"unknown plot kind {kind!r}; choose from {', '.join(PLOT_KINDS)}")
