"""CSV and JSON serialization for points, fields, diagrams, curves, bands and trees.

Floats are written in shortest round-trip form (``repr``). Infinities are the
token ``inf`` in CSV and the strings ``"inf"``/``"-inf"`` in JSON. CSV files
have a header row, use ``,`` as separator and ``.`` as decimal mark.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from typing import Any, Iterable, Sequence, TextIO

import numpy as np

from tdakit.clustering import Branch, ClusterTree
from tdakit.errors import InputError
from tdakit.estimators import EvaluationGrid, ScalarField
from tdakit.persistence import PersistenceDiagram
from tdakit.statistics import ConfidenceBand, MultiplierBand
from tdakit.summaries import SummaryCurve

DIAGRAM_HEADER = ["dimension", "birth", "death", "essential"]


def fmt(x) -> str:
    """Shortest round-trip text for a number; ``inf``/``-inf``/``nan`` for non-finite."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def parse_float(text: str) -> float:
    try:
        return float(text.strip())
    except ValueError:
        raise InputError(f"cannot parse number {text!r}") from None


def jsonable(obj: Any) -> Any:
    """Recursively convert numpy values and non-finite floats for ``json.dumps``."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def json_float(value) -> float:
    if isinstance(value, str):
        return parse_float(value)
    return float(value)


def dumps_json(obj: Any) -> str:
    return json.dumps(jsonable(obj), indent=2) + "\n"


def write_csv(stream: TextIO, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    write_csv(buf, header, rows)
    return buf.getvalue()


def read_csv(text: str) -> tuple[list[str], list[list[str]]]:
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise InputError("CSV input is empty")
    return [h.strip() for h in rows[0]], rows[1:]


def sha256_text(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


# -- points -------------------------------------------------------------------

def points_to_csv(X) -> str:
    X = np.asarray(X, dtype=float)
    header = ["x", "y"] if X.shape[1] == 2 else [f"x{i + 1}" for i in range(X.shape[1])]
    return csv_text(header, X.tolist())


def points_from_csv(text: str) -> np.ndarray:
    header, rows = read_csv(text)
    if not rows:
        raise InputError("point file has a header but no points")
    if any(len(r) != len(header) for r in rows):
        raise InputError("all point rows must have as many columns as the header")
    return np.array([[parse_float(c) for c in r] for r in rows], dtype=float)


# -- fields -------------------------------------------------------------------

def field_to_csv(field_: ScalarField) -> str:
    pts = field_.grid.points
    header = [f"x{i + 1}" for i in range(pts.shape[1])] + ["value"]
    return csv_text(header, (list(p) + [v] for p, v in zip(pts.tolist(), field_.values.tolist())))


def field_to_json(field_: ScalarField) -> dict:
    return {
        "grid": {"lim": [list(p) for p in field_.grid.lim], "by": field_.grid.by,
                 "shape": list(field_.grid.shape), "order": "first-axis-fastest"},
        "values": field_.values,
    }


def field_from_json(obj: dict) -> ScalarField:
    g = obj["grid"]
    grid = EvaluationGrid(tuple((json_float(a), json_float(b)) for a, b in g["lim"]), json_float(g["by"]))
    return ScalarField(grid, [json_float(v) for v in obj["values"]])


def field_from_csv(text: str) -> ScalarField:
    """Rebuild a field from its CSV dump, inferring the grid from the coordinates."""
    header, rows = read_csv(text)
    data = np.array([[parse_float(c) for c in r] for r in rows], dtype=float)
    if data.ndim != 2 or data.shape[1] < 2:
        raise InputError("field CSV needs coordinate columns and a value column")
    coords = data[:, :-1]
    axes = [np.unique(coords[:, k]) for k in range(coords.shape[1])]
    if any(len(a) < 2 for a in axes):
        raise InputError("field CSV needs at least 2 samples per axis")
    by = float(axes[0][1] - axes[0][0])
    lim = tuple((float(a[0]), float(a[-1])) for a in axes)
    grid = EvaluationGrid(lim, by)
    if grid.size != data.shape[0]:
        raise InputError("field CSV does not describe a complete grid")
    return ScalarField(grid, data[:, -1])


# -- diagrams -----------------------------------------------------------------

def diagram_to_csv(D: PersistenceDiagram) -> str:
    rows = zip(D.dimensions.tolist(), D.births.tolist(), D.deaths.tolist(), D.essential.tolist())
    return csv_text(DIAGRAM_HEADER, ([d, b, e, int(ess)] for d, b, e, ess in rows))


def _truthy(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "t", "yes"):
        return True
    if t in ("0", "false", "f", "no", ""):
        return False
    raise InputError(f"cannot parse flag {text!r}")


def diagram_from_csv(text: str, orientation: str | None = None, scale_cap: float | None = None) -> PersistenceDiagram:
    """Parse a diagram CSV; orientation and cap are inferred when not given.

    Without metadata the orientation is superlevel if any finite pair has
    birth above death, and the cap is the death of the essential classes.
    """
    header, rows = read_csv(text)
    cols = {h: i for i, h in enumerate(header)}
    for name in ("dimension", "birth", "death"):
        if name not in cols:
            raise InputError(f"diagram CSV lacks column {name!r}")
    dims, births, deaths, ess = [], [], [], []
    for r in rows:
        dims.append(int(parse_float(r[cols["dimension"]])))
        births.append(parse_float(r[cols["birth"]]))
        deaths.append(parse_float(r[cols["death"]]))
        ess.append(_truthy(r[cols["essential"]]) if "essential" in cols else False)
    b, d, e = np.array(births), np.array(deaths), np.array(ess, dtype=bool)
    if orientation is None:
        orientation = "superlevel" if np.any(b[~e] > d[~e]) else "sublevel"
        if not np.any(~e) and np.any(e):
            orientation = "superlevel" if np.any(b[e] > d[e]) else "sublevel"
    if scale_cap is None:
        scale_cap = float(d[e][0]) if np.any(e) else math.inf
    return PersistenceDiagram(np.array(dims, dtype=np.int64), b, d, e, orientation, scale_cap)


def diagram_to_json(D: PersistenceDiagram) -> dict:
    return {
        "orientation": D.orientation,
        "scale_cap": D.scale_cap,
        "pairs": [
            {"dimension": d, "birth": b, "death": e, "essential": bool(s)}
            for d, b, e, s in zip(D.dimensions.tolist(), D.births.tolist(), D.deaths.tolist(), D.essential.tolist())
        ],
    }


def diagram_from_json(obj: dict) -> PersistenceDiagram:
    pairs = obj.get("pairs", [])
    return PersistenceDiagram(
        np.array([int(p["dimension"]) for p in pairs], dtype=np.int64),
        np.array([json_float(p["birth"]) for p in pairs], dtype=float),
        np.array([json_float(p["death"]) for p in pairs], dtype=float),
        np.array([bool(p.get("essential", False)) for p in pairs], dtype=bool),
        obj.get("orientation", "sublevel"),
        json_float(obj.get("scale_cap", "inf")),
    )


def load_diagram(text: str) -> PersistenceDiagram:
    """Parse a diagram from either its JSON or CSV form."""
    if text.lstrip().startswith("{"):
        obj = json.loads(text)
        return diagram_from_json(obj.get("diagram", obj))
    return diagram_from_csv(text)


# -- curves -------------------------------------------------------------------

def curve_to_csv(curve: SummaryCurve) -> str:
    return csv_text(["t", "value"], zip(curve.tseq.tolist(), curve.values.tolist()))


def curve_from_csv(text: str) -> SummaryCurve:
    header, rows = read_csv(text)
    if header[:2] != ["t", "value"]:
        raise InputError("curve CSV must have header t,value")
    data = np.array([[parse_float(c) for c in r[:2]] for r in rows], dtype=float).reshape(-1, 2)
    return SummaryCurve(data[:, 0], data[:, 1])


def curves_from_csv(text: str) -> tuple[np.ndarray, np.ndarray]:
    """Read ``t,c0,c1,...`` columns; returns ``tseq`` and an (n_curves, T) matrix."""
    header, rows = read_csv(text)
    if not header or header[0] != "t":
        raise InputError("curve matrix CSV must start with a t column")
    if any(len(r) != len(header) for r in rows):
        raise InputError("inconsistent curve lengths in curve matrix CSV")
    data = np.array([[parse_float(c) for c in r] for r in rows], dtype=float)
    if data.ndim != 2 or data.shape[1] < 2:
        raise InputError("curve matrix CSV needs at least one curve column")
    return data[:, 0], data[:, 1:].T


def curves_to_csv(tseq, curves) -> str:
    curves = np.asarray(curves, dtype=float)
    header = ["t"] + [f"curve_{i}" for i in range(curves.shape[0])]
    return csv_text(header, (
        [t] + col for t, col in zip(np.asarray(tseq).tolist(), curves.T.tolist())
    ))


# -- cluster trees --------------------------------------------------------------

def tree_to_json(tree: ClusterTree) -> dict:
    return {
        "k": tree.k,
        "density_estimator": tree.estimator,
        "density": tree.density,
        "leaves": tree.leaves,
        "branches": [
            {
                "id": b.id, "parent": b.parent, "children": b.children,
                "lambda": [b.lambda_birth, b.lambda_death],
                "alpha": [b.alpha_birth, b.alpha_death],
                "kappa": [b.kappa_birth, b.kappa_death],
                "members": list(b.members), "own": list(b.own),
            }
            for b in tree.branches
        ],
    }


def tree_from_json(obj: dict) -> ClusterTree:
    branches = [
        Branch(
            id=int(b["id"]), parent=None if b["parent"] is None else int(b["parent"]),
            children=[int(c) for c in b["children"]],
            lambda_birth=json_float(b["lambda"][0]), lambda_death=json_float(b["lambda"][1]),
            alpha_birth=json_float(b["alpha"][0]), alpha_death=json_float(b["alpha"][1]),
            kappa_birth=json_float(b["kappa"][0]), kappa_death=json_float(b["kappa"][1]),
            members=tuple(int(m) for m in b["members"]), own=tuple(int(m) for m in b.get("own", [])),
        )
        for b in obj["branches"]
    ]
    density = np.array([json_float(v) for v in obj["density"]], dtype=float)
    return ClusterTree(branches, density, int(obj["k"]), obj.get("density_estimator", "knn"))


def tree_to_csv(tree: ClusterTree) -> str:
    header = ["id", "parent", "lambda_birth", "lambda_death", "alpha_birth", "alpha_death",
              "kappa_birth", "kappa_death", "size"]
    rows = (
        [b.id, "" if b.parent is None else b.parent, b.lambda_birth, b.lambda_death,
         b.alpha_birth, b.alpha_death, b.kappa_birth, b.kappa_death, len(b.members)]
        for b in tree.branches
    )
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if v == "" else fmt(v) for v in row])
    return buf.getvalue()


# -- bands ----------------------------------------------------------------------

def band_to_json(band: ConfidenceBand) -> dict:
    return {
        "alpha": band.alpha, "B": band.B, "seed": band.seed, "width": band.width,
        "center": band.center, "lower": band.lower, "upper": band.upper, "thetas": band.thetas,
    }


def band_from_json(obj: dict) -> ConfidenceBand:
    arr = lambda key: np.array([json_float(v) for v in obj[key]], dtype=float)  # noqa: E731
    return ConfidenceBand(
        width=json_float(obj["width"]), center=arr("center"), lower=arr("lower"), upper=arr("upper"),
        alpha=json_float(obj["alpha"]), B=int(obj["B"]), seed=int(obj["seed"]), thetas=arr("thetas"),
    )


def multiplier_band_to_json(band: MultiplierBand) -> dict:
    return {
        "alpha": band.alpha, "B": band.B, "seed": band.seed, "width": band.width,
        "mean": band.mean, "lower": band.lower, "upper": band.upper,
    }


def multiplier_band_from_json(obj: dict) -> MultiplierBand:
    arr = lambda key: np.array([json_float(v) for v in obj[key]], dtype=float)  # noqa: E731
    return MultiplierBand(
        mean=arr("mean"), lower=arr("lower"), upper=arr("upper"), width=json_float(obj["width"]),
        alpha=json_float(obj["alpha"]), B=int(obj["B"]), seed=int(obj["seed"]),
    )
