import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from _oracles import diagram_counter, kuhn_complex, persistence_oracle, rips_complex
from tdakit.errors import InputError
from tdakit.estimators import ScalarField, make_grid
from tdakit.filtration import Filtration, build_grid_filtration, build_rips_filtration, pairwise_distances
from tdakit.persistence import (
    Pairing,
    PersistenceDiagram,
    extract_diagram,
    grid_diag,
    grid_diag_field,
    reduce_boundary_matrix,
    rips_diag,
)

SQRT2 = math.sqrt(2)


def _field(shape, values):
    return ScalarField(make_grid([(0, s - 1) for s in shape], 1.0), np.asarray(values, dtype=float))


def _canon(D):
    return sorted(zip(D.dimensions.tolist(), D.births.tolist(), D.deaths.tolist(), D.essential.tolist()))


def test_single_vertex():
    filt = Filtration.from_simplices([(0,)], [0.0])
    assert reduce_boundary_matrix(filt) == Pairing((), (0,))


def test_two_vertices_one_edge():
    filt = Filtration.from_simplices([(0,), (1,), (0, 1)], [0.0, 0.0, 1.0])
    pairing = reduce_boundary_matrix(filt)
    assert pairing.pairs == ((1, 2),)
    assert pairing.essential == (0,)
    D = extract_diagram(pairing, filt, 5.0, 0)
    assert _canon(D) == [(0, 0.0, 1.0, False), (0, 0.0, 5.0, True)]


def test_unit_square_rips():
    X = [[0, 0], [1, 0], [1, 1], [0, 1]]
    D = rips_diag(X, 1, 2.0)
    h0 = D.restrict(0)
    assert sorted(h0.births.tolist()) == [0.0] * 4
    assert sorted(h0.deaths.tolist()) == pytest.approx([1, 1, 1, 2], abs=1e-9)
    assert h0.essential.sum() == 1 and h0.deaths[h0.essential][0] == 2.0
    h1 = D.restrict(1)
    assert len(h1) == 1
    assert h1.births[0] == pytest.approx(1.0, abs=1e-9)
    assert h1.deaths[0] == pytest.approx(SQRT2, abs=1e-9)


def test_equilateral_triangle_has_no_loop():
    X = [[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]]
    D = rips_diag(X, 1, 2.0)
    assert len(D.restrict(1)) == 0


def test_single_point_rips():
    D = rips_diag([[0.3, 0.4]], 1, 2.5)
    assert _canon(D) == [(0, 0.0, 2.5, True)]


def test_grid_1d_examples():
    sub = grid_diag_field(_field((4,), [0, 2, 1, 3]), sublevel=True)
    assert _canon(sub) == [(0, 0.0, 3.0, True), (0, 1.0, 2.0, False)]
    assert sub.orientation == "sublevel" and sub.scale_cap == 3.0
    sup = grid_diag_field(_field((4,), [0, 2, 1, 3]), sublevel=False)
    assert _canon(sup) == [(0, 2.0, 1.0, False), (0, 3.0, 0.0, True)]
    assert sup.orientation == "superlevel" and sup.scale_cap == 0.0


def test_constant_field_single_essential():
    D = grid_diag_field(_field((3, 3), np.full(9, 0.25)), sublevel=False)
    assert _canon(D) == [(0, 0.25, 0.25, True)]


def test_empty_pairing_gives_empty_diagram():
    filt = Filtration.from_simplices([], [])
    D = extract_diagram(Pairing((), ()), filt, 1.0, 1)
    assert len(D) == 0


def test_grid_diag_pipeline_circle():
    from tdakit.datasets import sample_circle

    X = sample_circle(400, seed=0)
    D = grid_diag(X, "kde", [(-1.6, 1.6), (-1.7, 1.7)], 0.065, sublevel=False, param=0.3)
    life = np.sort(D.restrict(1).lifetimes)[::-1]
    assert len(life) >= 1
    assert np.all(life[0] > 5 * life[1:])


def test_reduction_rejects_non_monotone():
    filt = Filtration.from_simplices([(0,), (1,), (0, 1)], [0.0, 2.0, 1.0], validate=False)
    with pytest.raises(InputError):
        reduce_boundary_matrix(filt)


def test_unknown_method():
    filt = Filtration.from_simplices([(0,)], [0.0])
    with pytest.raises(InputError):
        reduce_boundary_matrix(filt, method="fancy")


def test_diagram_invariants():
    with pytest.raises(InputError):
        PersistenceDiagram.from_pairs([(0, 2.0, 1.0)], "sublevel")
    with pytest.raises(InputError):
        PersistenceDiagram.from_pairs([(0, 1.0, 2.0)], "superlevel")
    with pytest.raises(InputError):
        PersistenceDiagram.from_pairs([(0, 1.0, 1.0)])
    ok = PersistenceDiagram.from_pairs([(0, 1.0, 1.0)], essential=[True], scale_cap=1.0)
    assert len(ok) == 1


# -- oracle equivalence --------------------------------------------------------------

def test_all_small_filtrations_match_oracle():
    """Every filtration of the triangle's subcomplexes with values in {0,1,2}."""
    import itertools

    full = [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2), (0, 1, 2)]
    checked = 0
    for mask in range(1, 1 << len(full)):
        simplices = [s for i, s in enumerate(full) if mask >> i & 1]
        present = set(simplices)
        if any(f not in present for s in simplices for f in itertools.combinations(s, len(s) - 1) if f):
            continue
        for vals in itertools.product(range(3), repeat=len(simplices)):
            value = dict(zip(simplices, vals))
            if any(value[f] > value[s] for s in simplices for f in itertools.combinations(s, len(s) - 1) if f):
                continue
            filt = Filtration.from_simplices(simplices, vals)
            D = extract_diagram(reduce_boundary_matrix(filt), filt, 9.0, 2)
            assert diagram_counter(D) == persistence_oracle(simplices, vals, 2)
            checked += 1
    assert checked > 100


@given(arrays(np.float64, st.tuples(st.integers(1, 8), st.just(2)), elements=st.floats(0, 1, allow_nan=False)),
       st.integers(0, 2), st.floats(0.05, 1.5))
@settings(max_examples=80, deadline=None)
def test_rips_matches_oracle(X, maxdim, maxscale):
    D = rips_diag(X, maxdim, maxscale)
    simplices, values = rips_complex(pairwise_distances(X), maxdim, maxscale)
    # the top simplices only kill classes; the oracle sees the same complex
    assert diagram_counter(D) == persistence_oracle(simplices, values, maxdim)


@given(st.sampled_from([(3,), (2, 2), (2, 3), (3, 3), (2, 2, 2)]), st.data(), st.booleans())
@settings(max_examples=120, deadline=None)
def test_grid_matches_oracle(shape, data, sublevel):
    n = math.prod(shape)
    vals = np.array(data.draw(st.lists(st.integers(0, 3), min_size=n, max_size=n)), dtype=float)
    D = grid_diag_field(_field(shape, vals), sublevel, len(shape) - 1)
    cx = kuhn_complex(shape)
    f = vals if sublevel else -vals
    oracle = persistence_oracle(cx, [max(f[list(s)]) for s in cx], len(shape) - 1)
    assert diagram_counter(D, negate=not sublevel) == oracle


@given(arrays(np.float64, st.tuples(st.integers(1, 9), st.just(2)), elements=st.floats(0, 1, allow_nan=False)),
       st.floats(0.05, 1.5))
@settings(max_examples=60, deadline=None)
def test_twist_equals_standard_rips(X, maxscale):
    filt = build_rips_filtration(X, 2, maxscale)
    assert set(reduce_boundary_matrix(filt, "twist").pairs) == set(reduce_boundary_matrix(filt, "standard").pairs)
    assert rips_diag(X, 2, maxscale, method="twist") == rips_diag(X, 2, maxscale, method="standard")


def test_twist_equals_standard_grid():
    rng = np.random.default_rng(0)
    for shape in [(5, 5), (3, 3, 3)]:
        vals = rng.normal(size=math.prod(shape))
        for sublevel in (True, False):
            f = _field(shape, vals)
            a = grid_diag_field(f, sublevel, method="twist")
            b = grid_diag_field(f, sublevel, method="standard")
            assert a == b
            filt = build_grid_filtration(f, sublevel)
            assert reduce_boundary_matrix(filt, "twist") == reduce_boundary_matrix(filt, "standard")


def test_rips_point_cloud_equals_distance_matrix():
    X = np.random.default_rng(1).random((12, 3))
    assert rips_diag(X, 2, 0.7) == rips_diag(pairwise_distances(X), 2, 0.7, distance_matrix=True)


def test_maxdimension_bounds_dimensions():
    X = np.random.default_rng(2).random((10, 3))
    for k in range(3):
        assert set(rips_diag(X, k, 2.0).dimensions.tolist()) <= set(range(k + 1))


def test_canonical_is_a_permutation():
    D = rips_diag(np.random.default_rng(3).random((10, 2)), 1, 1.0)
    C = D.canonical()
    assert Counter(C.pairs) == Counter(D.pairs)
