"""Command-line front end: ``tdakit <subcommand> [options]``.

Exit codes: 0 success, 2 usage error, 3 invalid input (including unreadable
files), 4 numeric-domain error such as an infinite diagram distance.

Every JSON output embeds a run manifest (subcommand, parameters, seed,
SHA-256 digests of the inputs, tool version) and nothing time-dependent, so
identical invocations give byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Sequence

import numpy as np

from tdakit import __version__
from tdakit import io as tio
from tdakit.clustering import cluster_tree
from tdakit.datasets import sample_circle
from tdakit.errors import InputError, NumericDomainError
from tdakit.estimators import ESTIMATORS, evaluate_on_grid, make_grid
from tdakit.filtration import build_grid_filtration, build_rips_filtration
from tdakit.metrics import bottleneck, wasserstein
from tdakit.persistence import extract_diagram, grid_diag_field, reduce_boundary_matrix
from tdakit.plotting import PLOT_KINDS, plot, plot_curve, plot_dendrogram, plot_diagram, plot_max_persistence
from tdakit.statistics import bootstrap_band, max_persistence, multip_bootstrap, significant_features
from tdakit.summaries import landscape, silhouette

# estimators whose high values mark features; they default to superlevel sets
DENSITY_ESTIMATORS = ("knn", "kde")


class _Inputs:
    """Contents of the ``--in`` files plus their digests for the manifest."""

    def __init__(self, paths: Sequence[str] | None):
        self.paths = list(paths or [])
        self.texts: list[str] = []
        self.digests: list[dict] = []
        for p in self.paths:
            with open(p, "rb") as fh:
                raw = fh.read()
            self.texts.append(raw.decode("utf-8"))
            self.digests.append({"file": os.path.basename(p), "sha256": tio.sha256_text(raw)})

    def require(self, what: str) -> list[str]:
        if not self.texts:
            raise InputError(f"--in is required ({what})")
        return self.texts

    def points(self) -> np.ndarray:
        """All ``--in`` point files stacked row-wise."""
        parts = [tio.points_from_csv(t) for t in self.require("point CSV")]
        if len({p.shape[1] for p in parts}) != 1:
            raise InputError("all --in point files must have the same dimension")
        return np.vstack(parts)

    def add(self, path: str) -> str:
        with open(path, "rb") as fh:
            raw = fh.read()
        self.digests.append({"file": os.path.basename(path), "sha256": tio.sha256_text(raw)})
        return raw.decode("utf-8")


def _manifest(args, inputs: _Inputs) -> dict:
    skip = {"func", "inputs", "out", "format", "svg", "dump_filtration"}
    params = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    return {
        "subcommand": args.command,
        "parameters": params,
        "seed": args.seed,
        "inputs": inputs.digests,
        "version": __version__,
    }


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(args, inputs: _Inputs, result: dict) -> None:
    _emit(args, tio.dumps_json({"manifest": _manifest(args, inputs), **result}))


def _write_side(path: str | None, text: str) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# -- argument types ---------------------------------------------------------------

def _pair(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo,hi but got {text!r}") from None
    return lo, hi


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _param(args) -> float | int | None:
    """The smoothing parameter matching ``args.fn``."""
    name = ESTIMATORS[args.fn][1]
    if name is None:
        return None
    value = getattr(args, name)
    if value is None:
        raise InputError(f"--fn {args.fn} requires --{name}")
    return value


def _sublevel(args) -> bool:
    if args.level is not None:
        return args.level == "sublevel"
    return getattr(args, "fn", None) not in DENSITY_ESTIMATORS


def _tseq(args, lo: float, hi: float) -> np.ndarray:
    tmin = lo if args.tmin is None else args.tmin
    tmax = hi if args.tmax is None else args.tmax
    if args.tlen < 1:
        raise InputError("--tlen must be at least 1")
    return np.linspace(tmin, tmax, args.tlen)


# -- subcommands ------------------------------------------------------------------

def cmd_sample_circle(args, inputs):
    X = sample_circle(args.n, args.r, args.offset, args.seed)
    if args.format == "json":
        _emit_json(args, inputs, {"points": X})
    else:
        _emit(args, tio.points_to_csv(X))


def _field(args, inputs):
    X = inputs.points()
    grid = make_grid(args.lim or [], args.by)
    return evaluate_on_grid(args.fn, X, grid, _param(args), args.threads)


def cmd_estimate(args, inputs):
    field_ = _field(args, inputs)
    if args.format == "json":
        _emit_json(args, inputs, {"field": tio.field_to_json(field_)})
    else:
        _emit(args, tio.field_to_csv(field_))
    if args.svg:
        _write_side(args.svg, plot("field", field_, title=f"{args.fn} estimate"))


def _load_field(text: str):
    if text.lstrip().startswith("{"):
        obj = json.loads(text)
        return tio.field_from_json(obj.get("field", obj))
    return tio.field_from_csv(text)


def _emit_diagram(args, inputs, D):
    if args.format == "json":
        _emit_json(args, inputs, {"diagram": tio.diagram_to_json(D)})
    else:
        _emit(args, tio.diagram_to_csv(D))
    if args.svg:
        _write_side(args.svg, plot_diagram(D))


def cmd_grid_diag(args, inputs):
    if args.field:
        field_ = _load_field(inputs.add(args.field))
    else:
        if args.fn is None:
            raise InputError("grid-diag needs --field or --fn with --in points")
        field_ = _field(args, inputs)
    sublevel = _sublevel(args)
    filt = build_grid_filtration(field_, sublevel)
    if args.dump_filtration:
        _write_side(args.dump_filtration, filt.dump())
    maxdim = field_.grid.dim - 1 if args.maxdim is None else args.maxdim
    if not 0 <= maxdim <= field_.grid.dim:
        raise InputError(f"--maxdim must lie in [0, {field_.grid.dim}]")
    cap = float(np.max(field_.values) if sublevel else np.min(field_.values))
    D = extract_diagram(reduce_boundary_matrix(filt), filt, cap, maxdim)
    _emit_diagram(args, inputs, D)


def cmd_rips_diag(args, inputs):
    if args.dist_matrix:
        texts = inputs.require("distance matrix CSV")
        if len(texts) != 1:
            raise InputError("--dist-matrix takes exactly one --in file")
        data = _matrix_from_csv(texts[0])
    else:
        data = inputs.points()
    filt = build_rips_filtration(data, args.maxdim, args.maxscale, args.dist_matrix)
    if args.dump_filtration:
        _write_side(args.dump_filtration, filt.dump())
    D = extract_diagram(reduce_boundary_matrix(filt), filt, float(args.maxscale), args.maxdim)
    _emit_diagram(args, inputs, D)


def _matrix_from_csv(text: str) -> np.ndarray:
    """Square matrix from CSV; a non-numeric first row is taken as a header."""
    header, rows = tio.read_csv(text)
    try:
        first = [[float(c) for c in header]]
    except ValueError:
        first = []
    return np.array(first + [[tio.parse_float(c) for c in r] for r in rows], dtype=float)


def cmd_distance(args, inputs):
    D1 = tio.load_diagram(inputs.add(args.d1))
    D2 = tio.load_diagram(inputs.add(args.d2))
    if args.metric == "bottleneck":
        value = bottleneck(D1, D2, args.dim)
    else:
        value = wasserstein(D1, D2, args.p, args.dim)
    if math.isinf(value):
        raise NumericDomainError(
            f"diagrams have different numbers of essential classes in dimension {args.dim}; distance is infinite"
        )
    if args.format == "json":
        _emit_json(args, inputs, {"metric": args.metric, "dimension": args.dim, "value": value})
    else:
        _emit(args, f"{value:.6f}\n")


def _curves(args, inputs, compute):
    diagrams = [tio.load_diagram(t) for t in inputs.require("diagram file")]
    ends = [v for D in diagrams for v in np.concatenate([D.births, D.deaths]).tolist() if math.isfinite(v)]
    lo, hi = (min(ends), max(ends)) if ends else (0.0, 1.0)
    t = _tseq(args, lo, hi)
    curves = [compute(D, t) for D in diagrams]
    return t, curves


def _emit_curves(args, inputs, kind, t, curves):
    if args.format == "json":
        _emit_json(args, inputs, {"t": t, "curves": [c.values for c in curves],
                                  "empty": [c.empty for c in curves]})
    elif len(curves) == 1:
        _emit(args, tio.curve_to_csv(curves[0]))
    else:
        _emit(args, tio.curves_to_csv(t, [c.values for c in curves]))
    if args.svg:
        _write_side(args.svg, plot(kind, curves[0], title=kind))


def cmd_landscape(args, inputs):
    t, curves = _curves(args, inputs, lambda D, t: landscape(
        D, args.dim, args.KK, t, include_essential=not args.exclude_essential))
    _emit_curves(args, inputs, "landscape", t, curves)


def cmd_silhouette(args, inputs):
    t, curves = _curves(args, inputs, lambda D, t: silhouette(
        D, args.p, args.dim, t, include_essential=not args.exclude_essential))
    _emit_curves(args, inputs, "silhouette", t, curves)


def cmd_bootstrap_band(args, inputs):
    X = inputs.points()
    grid = make_grid(args.lim or [], args.by)
    param = _param(args)
    band = bootstrap_band(X, args.fn, grid, args.B, args.alpha, args.seed, param, args.threads)
    field_ = evaluate_on_grid(args.fn, X, grid, param, args.threads)
    D = grid_diag_field(field_, _sublevel(args), args.maxdim)
    significant, _ = significant_features(D, band.width)
    counts = {str(k): int(np.sum(significant.dimensions == k)) for k in sorted(set(D.dimensions.tolist()))}
    if args.format == "json":
        _emit_json(args, inputs, {
            "alpha": band.alpha, "B": band.B, "seed": band.seed, "width": band.width,
            "significant_by_dimension": counts,
            "band": tio.band_to_json(band),
            "diagram": tio.diagram_to_json(D),
        })
    else:
        pts = grid.points
        header = [f"x{i + 1}" for i in range(pts.shape[1])] + ["center", "lower", "upper"]
        rows = (list(p) + [c, lo, hi] for p, c, lo, hi in
                zip(pts.tolist(), band.center.tolist(), band.lower.tolist(), band.upper.tolist()))
        _emit(args, tio.csv_text(header, rows))
    if args.svg:
        _write_side(args.svg, plot_diagram(D, band=2 * band.width))


def cmd_multip_bootstrap(args, inputs):
    texts = inputs.require("curve matrix CSV")
    ts, mats = zip(*(tio.curves_from_csv(t) for t in texts))
    if any(len(t) != len(ts[0]) or not np.array_equal(t, ts[0]) for t in ts):
        raise InputError("all curve files must share the same t column")
    t = ts[0]
    band = multip_bootstrap(np.vstack(mats), args.B, args.alpha, args.seed)
    if args.format == "json":
        _emit_json(args, inputs, {
            "alpha": band.alpha, "B": band.B, "seed": band.seed, "width": band.width,
            "t": t, "band": tio.multiplier_band_to_json(band),
        })
    else:
        _emit(args, tio.csv_text(["t", "mean", "lower", "upper"],
                                 zip(t.tolist(), band.mean.tolist(), band.lower.tolist(), band.upper.tolist())))
    if args.svg:
        _write_side(args.svg, plot_curve(t, band.mean, band.lower, band.upper, title="mean curve"))


def cmd_max_persistence(args, inputs):
    if args.params:
        params = args.params
    else:
        if None in (args.pmin, args.pmax, args.pstep) or args.pstep <= 0:
            raise InputError("give --params or --pmin, --pmax and a positive --pstep")
        count = int(math.floor((args.pmax - args.pmin) / args.pstep + 1e-9)) + 1
        params = [round(args.pmin + i * args.pstep, 12) for i in range(count)]
    X = inputs.points()
    result = max_persistence(args.fn, params, X, args.lim or [], args.by, _sublevel(args),
                             args.B, args.alpha, args.seed, args.maxdim, args.threads)
    if args.format == "json":
        _emit_json(args, inputs, {
            "alpha": args.alpha, "B": args.B, "seed": args.seed,
            "parameters": result.parameters,
            "width": [r.width for r in result.records],
            "n_significant": result.n_significant,
            "total_significant": result.total_significant,
            "argmax_n": list(result.argmax_n),
            "argmax_s": list(result.argmax_s),
        })
    else:
        rows = ([r.parameter, r.width, r.n_significant, r.total_significant] for r in result.records)
        _emit(args, tio.csv_text(["parameter", "width", "n_significant", "total_significant"], rows))
    if args.svg:
        _write_side(args.svg, plot_max_persistence(result))


def cmd_cluster_tree(args, inputs):
    tree = cluster_tree(inputs.points(), args.k, args.density, args.h)
    if args.format == "json":
        _emit_json(args, inputs, {"tree": tio.tree_to_json(tree)})
    else:
        _emit(args, tio.tree_to_csv(tree))
    if args.svg:
        _write_side(args.svg, plot_dendrogram(tree, args.type))


def _load_band_for_plot(text: str) -> dict:
    if text.lstrip().startswith("{"):
        obj = json.loads(text)
        band = obj.get("band", obj)
        t = obj.get("t", list(range(len(band["lower"]))))
        mean = band.get("mean", band.get("center"))
        conv = lambda seq: np.array([tio.json_float(v) for v in seq], dtype=float)  # noqa: E731
        return {"t": conv(t), "mean": conv(mean), "lower": conv(band["lower"]), "upper": conv(band["upper"])}
    header, rows = tio.read_csv(text)
    data = np.array([[tio.parse_float(c) for c in r] for r in rows], dtype=float)
    cols = {h: i for i, h in enumerate(header)}
    missing = {"t", "mean", "lower", "upper"} - set(cols)
    if missing:
        raise InputError(f"band CSV lacks columns {sorted(missing)}")
    return {k: data[:, cols[k]] for k in ("t", "mean", "lower", "upper")}


def cmd_plot(args, inputs):
    (text,) = inputs.require("file to plot")[:1]
    kind = args.kind
    if kind in ("diagram", "barcode", "rotated"):
        data = tio.load_diagram(text)
    elif kind in ("landscape", "silhouette"):
        data = tio.curve_from_csv(text)
    elif kind == "band":
        data = _load_band_for_plot(text)
    elif kind == "dendrogram":
        obj = json.loads(text)
        data = tio.tree_from_json(obj.get("tree", obj))
    else:
        data = _load_field(text)
    _emit(args, plot(kind, data, band=args.band, type=args.type, title=args.title or ""))


# -- parser -------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--in", dest="inputs", action="append", metavar="FILE",
                   help="input file; repeat to concatenate several")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--seed", type=int, default=0, help="seed of the random generator (default 0)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")


def _estimator_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--fn", choices=sorted(ESTIMATORS), required=required)
    p.add_argument("--lim", type=_pair, action="append", metavar="LO,HI",
                   help="range of one grid axis, once per axis; write --lim=-1,1 for negative bounds")
    p.add_argument("--by", type=float, help="grid spacing")
    p.add_argument("--m0", type=float, help="mass parameter of dtm")
    p.add_argument("--k", type=int, help="neighbour count of knn")
    p.add_argument("--h", type=float, help="bandwidth of kde and kdist")


def _level_args(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--sublevel", dest="level", action="store_const", const="sublevel")
    g.add_argument("--superlevel", dest="level", action="store_const", const="superlevel")
    p.set_defaults(level=None)


def _curve_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dim", type=int, default=1, help="homological dimension (default 1)")
    p.add_argument("--tmin", type=float)
    p.add_argument("--tmax", type=float)
    p.add_argument("--tlen", type=int, default=500, help="number of t samples (default 500)")
    p.add_argument("--exclude-essential", action="store_true")
    p.add_argument("--svg", help="also write an SVG line plot")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tdakit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"tdakit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample-circle", help="points uniform on a circle")
    _common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--offset", type=_pair, default=(0.0, 0.0), metavar="X,Y")
    p.set_defaults(func=cmd_sample_circle)

    p = sub.add_parser("estimate", help="evaluate an estimator on a grid")
    _common(p)
    _estimator_args(p)
    p.add_argument("--svg", help="also write a heat map")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("grid-diag", help="persistence diagram of a grid field")
    _common(p)
    _estimator_args(p, required=False)
    _level_args(p)
    p.add_argument("--field", help="field CSV/JSON from `estimate` instead of --in points")
    p.add_argument("--maxdim", type=int)
    p.add_argument("--dump-filtration", metavar="FILE")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_grid_diag)

    p = sub.add_parser("rips-diag", help="persistence diagram of a Rips filtration")
    _common(p)
    p.add_argument("--maxdim", type=int, default=1)
    p.add_argument("--maxscale", type=float, required=True)
    p.add_argument("--dist-matrix", action="store_true", help="--in holds a distance matrix")
    p.add_argument("--dump-filtration", metavar="FILE")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_rips_diag)

    p = sub.add_parser("distance", help="bottleneck or Wasserstein distance of two diagrams")
    _common(p)
    p.add_argument("d1")
    p.add_argument("d2")
    p.add_argument("--metric", choices=("bottleneck", "wasserstein"), default="bottleneck")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--dim", type=int, default=0)
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("landscape", help="persistence landscape of one or more diagrams")
    _common(p)
    _curve_args(p)
    p.add_argument("--KK", type=int, default=1)
    p.set_defaults(func=cmd_landscape)

    p = sub.add_parser("silhouette", help="power-weighted silhouette of one or more diagrams")
    _common(p)
    _curve_args(p)
    p.add_argument("--p", type=float, default=1.0)
    p.set_defaults(func=cmd_silhouette)

    p = sub.add_parser("bootstrap-band", help="bootstrap confidence band of an estimator")
    _common(p)
    _estimator_args(p)
    _level_args(p)
    p.add_argument("--B", type=int, default=100)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--maxdim", type=int)
    p.add_argument("--svg", help="also write the diagram with the 2*width band")
    p.set_defaults(func=cmd_bootstrap_band)

    p = sub.add_parser("multip-bootstrap", help="multiplier bootstrap band of a mean curve")
    _common(p)
    p.add_argument("--B", type=int, default=100)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--svg")
    p.set_defaults(func=cmd_multip_bootstrap)

    p = sub.add_parser("max-persistence", help="select a smoothing parameter by significant features")
    _common(p)
    _estimator_args(p)
    _level_args(p)
    p.add_argument("--params", type=_floats, metavar="P1,P2,...")
    p.add_argument("--pmin", type=float)
    p.add_argument("--pmax", type=float)
    p.add_argument("--pstep", type=float)
    p.add_argument("--B", type=int, default=50)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--maxdim", type=int)
    p.add_argument("--svg")
    p.set_defaults(func=cmd_max_persistence)

    p = sub.add_parser("cluster-tree", help="density cluster tree")
    _common(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--density", choices=("knn", "kde"), default="knn")
    p.add_argument("--h", type=float)
    p.add_argument("--svg")
    p.add_argument("--type", choices=("lambda", "alpha", "kappa"), default="lambda")
    p.set_defaults(func=cmd_cluster_tree)

    p = sub.add_parser("plot", help="SVG figure from a saved artifact")
    _common(p)
    p.add_argument("--kind", choices=PLOT_KINDS, required=True)
    p.add_argument("--band", type=float, help="band height for diagram and rotated plots")
    p.add_argument("--type", choices=("lambda", "alpha", "kappa"), default="lambda")
    p.add_argument("--title")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        inputs = _Inputs(args.inputs)
        args.func(args, inputs)
    except NumericDomainError as exc:
        print(f"tdakit: error: {exc}", file=sys.stderr)
        return 4
    except (InputError, OSError, UnicodeDecodeError, json.JSONDecodeError, KeyError) as exc:
        print(f"tdakit: error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
