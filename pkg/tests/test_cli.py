import json
import math

import numpy as np
import pytest

from tdakit import __version__
from tdakit import io as tio
from tdakit.cli import main
from tdakit.persistence import PersistenceDiagram


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def circle_csv(tmp_path):
    path = tmp_path / "circle.csv"
    assert run("sample-circle", "--n", 60, "--seed", 3, "--out", path) == 0
    return path


@pytest.fixture
def square_csv(tmp_path):
    path = tmp_path / "square.csv"
    path.write_text("x,y\n0,0\n1,0\n0,1\n1,1\n")
    return path


def test_sample_circle_seeded(tmp_path, circle_csv):
    again = tmp_path / "again.csv"
    run("sample-circle", "--n", 60, "--seed", 3, "--out", again)
    assert circle_csv.read_bytes() == again.read_bytes()
    X = tio.points_from_csv(circle_csv.read_text())
    assert X.shape == (60, 2) and np.allclose(np.hypot(X[:, 0], X[:, 1]), 1.0)


def test_rips_diag_unit_square(tmp_path, square_csv):
    out = tmp_path / "d.csv"
    assert run("rips-diag", "--in", square_csv, "--maxdim", 1, "--maxscale", 2, "--out", out) == 0
    D = tio.load_diagram(out.read_text())
    h1 = D.restrict(1)
    assert len(h1) == 1 and abs(h1.deaths[0] - math.sqrt(2)) < 1e-9
    assert sorted(D.restrict(0).deaths.tolist()) == [1.0, 1.0, 1.0, 2.0]


def test_rips_diag_distance_matrix(tmp_path):
    path = tmp_path / "m.csv"
    r = math.sqrt(2)
    path.write_text(f"a,b,c,d\n0,1,1,{r}\n1,0,{r},1\n1,{r},0,1\n{r},1,1,0\n")
    out = tmp_path / "d.json"
    assert run("rips-diag", "--in", path, "--dist-matrix", "--maxscale", 2, "--format", "json", "--out", out) == 0
    D = tio.load_diagram(out.read_text())
    assert len(D.restrict(1)) == 1


def test_dump_filtration_format(tmp_path, square_csv):
    dump = tmp_path / "filt.txt"
    run("rips-diag", "--in", square_csv, "--maxdim", 1, "--maxscale", 2,
        "--dump-filtration", dump, "--out", tmp_path / "d.csv")
    lines = dump.read_text().splitlines()
    # 4 vertices, 6 edges, 4 triangles
    assert len(lines) == 14
    values = []
    for line in lines:
        value, verts = line.split(";")
        values.append(float(value))
        assert all(v.isdigit() for v in verts.split(","))
    assert values == sorted(values)
    assert lines[0] == "0.0;0"


def test_grid_diag_superlevel_dump_keeps_original_scale(tmp_path):
    field_ = tmp_path / "f.csv"
    field_.write_text("x1,value\n0,0\n1,2\n2,1\n3,3\n")
    dump = tmp_path / "filt.txt"
    out = tmp_path / "d.csv"
    assert run("grid-diag", "--field", field_, "--superlevel", "--dump-filtration", dump, "--out", out) == 0
    first = dump.read_text().splitlines()[0]
    assert first == "3.0;3"
    D = tio.load_diagram(out.read_text())
    assert D.orientation == "superlevel"
    finite = sorted((b, d) for b, d, e in zip(D.births, D.deaths, D.essential) if not e)
    assert finite == [(2.0, 1.0)]


def test_estimate_and_grid_diag_from_points(tmp_path, circle_csv):
    field_ = tmp_path / "field.csv"
    assert run("estimate", "--fn", "kde", "--h", 0.3, "--in", circle_csv,
               "--lim=-1.5,1.5", "--lim=-1.5,1.5", "--by", 0.1, "--out", field_) == 0
    header = field_.read_text().splitlines()[0]
    assert header == "x1,x2,value"
    direct = tmp_path / "direct.csv"
    via_field = tmp_path / "via.csv"
    run("grid-diag", "--fn", "kde", "--h", 0.3, "--in", circle_csv,
        "--lim=-1.5,1.5", "--lim=-1.5,1.5", "--by", 0.1, "--out", direct)
    run("grid-diag", "--field", field_, "--superlevel", "--out", via_field)
    assert direct.read_bytes() == via_field.read_bytes()


def _write_diagram(path, pairs, **kw):
    path.write_text(tio.diagram_to_csv(PersistenceDiagram.from_pairs(pairs, **kw)))
    return path


def test_distance_prints_six_decimals(tmp_path, capsys):
    a = _write_diagram(tmp_path / "a.csv", [(0, 0, 1), (0, 0, 3)], essential=[False, True], scale_cap=3)
    b = _write_diagram(tmp_path / "b.csv", [(0, 0, 3)], essential=[True], scale_cap=3)
    assert run("distance", a, b) == 0
    assert capsys.readouterr().out == "0.500000\n"
    assert run("distance", "--metric", "wasserstein", "--p", 1, a, b) == 0
    assert capsys.readouterr().out == "0.500000\n"


def test_distance_json_manifest(tmp_path, capsys):
    a = _write_diagram(tmp_path / "a.csv", [(1, 0, 1)])
    b = _write_diagram(tmp_path / "b.csv", [(1, 0, 2)])
    assert run("distance", "--dim", 1, "--format", "json", a, b) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["value"] == 1.0
    man = obj["manifest"]
    assert man["subcommand"] == "distance" and man["version"] == __version__
    assert [d["file"] for d in man["inputs"]] == ["a.csv", "b.csv"]
    assert all(len(d["sha256"]) == 64 for d in man["inputs"])
    assert man["parameters"]["metric"] == "bottleneck" and man["seed"] == 0


def test_essential_mismatch_exit_code_4(tmp_path, capsys):
    a = _write_diagram(tmp_path / "a.csv", [(0, 0, 2)], essential=[True], scale_cap=2)
    b = _write_diagram(tmp_path / "b.csv", [(0, 0, 1)])
    assert run("distance", a, b) == 4
    assert "infinite" in capsys.readouterr().err


def test_usage_errors_exit_2():
    for argv in (["no-such-command"], ["distance"], ["rips-diag", "--maxscale", "x"],
                 ["landscape", "--threads", "0"]):
        with pytest.raises(SystemExit) as exc:
            run(*argv)
        assert exc.value.code == 2


def test_input_errors_exit_3(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1,2\n3\n")
    assert run("rips-diag", "--in", bad, "--maxscale", 1) == 3
    assert run("rips-diag", "--in", tmp_path / "missing.csv", "--maxscale", 1) == 3
    assert run("rips-diag", "--maxscale", 1) == 3
    assert run("estimate", "--fn", "kde", "--in", bad, "--by", 0.1) == 3
    good = tmp_path / "good.csv"
    good.write_text("x\n0\n1\n")
    assert run("estimate", "--fn", "kde", "--in", good, "--lim=0,1", "--by", 0.5) == 3
    assert run("estimate", "--fn", "dtm", "--m0", 2, "--in", good, "--lim=0,1", "--by", 0.5) == 3
    assert run("cluster-tree", "--k", 5, "--in", good) == 3


def test_landscape_and_silhouette_csv(tmp_path, square_csv):
    diag = tmp_path / "d.csv"
    run("rips-diag", "--in", square_csv, "--maxscale", 2, "--out", diag)
    out = tmp_path / "l.csv"
    assert run("landscape", "--in", diag, "--tmin", 0, "--tmax", 2, "--tlen", 21, "--out", out) == 0
    curve = tio.curve_from_csv(out.read_text())
    assert out.read_text().splitlines()[0] == "t,value"
    assert len(curve.tseq) == 21
    assert curve.values.max() == pytest.approx((math.sqrt(2) - 1) / 2, abs=0.05)
    two = tmp_path / "two.csv"
    assert run("silhouette", "--in", diag, "--in", diag, "--tlen", 10, "--out", two) == 0
    assert two.read_text().splitlines()[0] == "t,curve_0,curve_1"
    svg = tmp_path / "l.svg"
    run("landscape", "--in", diag, "--out", out, "--svg", svg)
    assert svg.read_text().startswith("<svg")


def _stochastic_commands(tmp_path, circle_csv, curves_csv):
    lim = ["--lim=-1.5,1.5", "--lim=-1.5,1.5"]
    return [
        ["sample-circle", "--n", 30, "--format", "json"],
        ["sample-circle", "--n", 30],
        ["bootstrap-band", "--fn", "kde", "--h", 0.3, "--in", circle_csv, *lim, "--by", 0.25, "--B", 15],
        ["bootstrap-band", "--fn", "kde", "--h", 0.3, "--in", circle_csv, *lim, "--by", 0.25, "--B", 15,
         "--format", "json"],
        ["multip-bootstrap", "--in", curves_csv, "--B", 30],
        ["multip-bootstrap", "--in", curves_csv, "--B", 30, "--format", "json"],
        ["max-persistence", "--fn", "kde", "--params", "0.2,0.4", "--in", circle_csv, *lim, "--by", 0.25,
         "--B", 8, "--format", "json"],
        ["max-persistence", "--fn", "kde", "--pmin", 0.2, "--pmax", 0.4, "--pstep", 0.2, "--in", circle_csv,
         *lim, "--by", 0.25, "--B", 8],
    ]


@pytest.fixture
def curves_csv(tmp_path):
    t = np.linspace(0, 1, 25)
    mats = np.random.default_rng(0).random((6, 25))
    path = tmp_path / "curves.csv"
    path.write_text(tio.curves_to_csv(t, mats))
    return path


def test_stochastic_commands_are_byte_identical(tmp_path, circle_csv, curves_csv):
    for i, argv in enumerate(_stochastic_commands(tmp_path, circle_csv, curves_csv)):
        outs = []
        for rep in range(2):
            out = tmp_path / f"out_{i}_{rep}"
            assert run(*argv, "--seed", 11, "--out", out) == 0, argv
            outs.append(out.read_bytes())
        assert outs[0] == outs[1], argv
        other = tmp_path / f"out_{i}_other"
        run(*argv, "--seed", 12, "--out", other)
        assert other.read_bytes() != outs[0], argv


def test_threads_do_not_change_results(tmp_path, circle_csv):
    outs = []
    for threads in (1, 3):
        out = tmp_path / f"b{threads}.json"
        run("bootstrap-band", "--fn", "kde", "--h", 0.3, "--in", circle_csv, "--lim=-1.5,1.5",
            "--lim=-1.5,1.5", "--by", 0.25, "--B", 12, "--format", "json", "--threads", threads, "--out", out)
        obj = json.loads(out.read_text())
        outs.append(obj["band"])
    assert outs[0] == outs[1]


def test_bootstrap_band_json_fields(tmp_path, circle_csv):
    out = tmp_path / "b.json"
    svg = tmp_path / "b.svg"
    run("bootstrap-band", "--fn", "kde", "--h", 0.3, "--in", circle_csv, "--lim=-1.5,1.5", "--lim=-1.5,1.5",
        "--by", 0.25, "--B", 10, "--alpha", 0.2, "--seed", 5, "--format", "json", "--out", out, "--svg", svg)
    obj = json.loads(out.read_text())
    assert {"manifest", "alpha", "B", "seed", "width", "significant_by_dimension", "band", "diagram"} <= set(obj)
    assert obj["alpha"] == 0.2 and obj["B"] == 10 and obj["seed"] == 5
    assert obj["manifest"]["seed"] == 5
    assert "data-band" in svg.read_text()


def test_max_persistence_json_fields(tmp_path, circle_csv):
    out = tmp_path / "m.json"
    svg = tmp_path / "m.svg"
    run("max-persistence", "--fn", "kde", "--params", "0.2,0.4", "--in", circle_csv, "--lim=-1.5,1.5",
        "--lim=-1.5,1.5", "--by", 0.25, "--B", 6, "--format", "json", "--out", out, "--svg", svg)
    obj = json.loads(out.read_text())
    assert obj["parameters"] == [0.2, 0.4]
    assert len(obj["width"]) == 2 and len(obj["n_significant"]) == 2
    assert set(obj["argmax_n"]) <= {0.2, 0.4} and obj["argmax_n"]
    assert svg.read_text().startswith("<svg")


def test_cluster_tree_outputs(tmp_path):
    pts = tmp_path / "p.csv"
    rng = np.random.default_rng(0)
    X = np.vstack([rng.normal(0, 0.2, (40, 2)), rng.normal(3, 0.2, (40, 2))])
    pts.write_text(tio.points_to_csv(X))
    out = tmp_path / "t.json"
    for kind in ("lambda", "alpha", "kappa"):
        svg = tmp_path / f"t_{kind}.svg"
        assert run("cluster-tree", "--k", 20, "--in", pts, "--format", "json", "--out", out,
                   "--svg", svg, "--type", kind) == 0
        assert svg.read_text().startswith("<svg")
    tree = tio.tree_from_json(json.loads(out.read_text())["tree"])
    assert len(tree.leaves) == 2
    plotted = tmp_path / "p.svg"
    assert run("plot", "--kind", "dendrogram", "--in", out, "--type", "kappa", "--out", plotted) == 0


def test_plot_subcommand(tmp_path, square_csv, curves_csv):
    diag = tmp_path / "d.csv"
    run("rips-diag", "--in", square_csv, "--maxscale", 2, "--out", diag)
    for kind in ("diagram", "barcode", "rotated"):
        out = tmp_path / f"{kind}.svg"
        assert run("plot", "--kind", kind, "--in", diag, "--band", 0.2, "--out", out) == 0
        assert out.read_text().startswith("<svg")
    band = tmp_path / "band.csv"
    run("multip-bootstrap", "--in", curves_csv, "--B", 10, "--out", band)
    out = tmp_path / "band.svg"
    assert run("plot", "--kind", "band", "--in", band, "--out", out) == 0
    assert 'class="band"' in out.read_text()
