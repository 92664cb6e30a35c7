import contextlib
import os
import sys
import time

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from tdakit.datasets import sample_box, sample_circle  # noqa: E402


def two_circles_with_noise(seed: int = 0) -> np.ndarray:
    """600 + 1000 circle points plus 80 uniform clutter points in [-2, 5]^2."""
    rng = np.random.default_rng(seed)
    return np.vstack([
        sample_circle(600, seed=rng),
        sample_circle(1000, r=1.5, offset=(2.5, 2.5), seed=rng),
        sample_box(80, -2.0, 5.0, seed=rng),
    ])


def three_gaussians(seed: int = 0) -> np.ndarray:
    """300 points each around (1, 5), (3.5, 5) and (6, 1) with sds 0.8, 0.8, 1."""
    rng = np.random.default_rng(seed)
    return np.vstack([
        rng.normal((1.0, 5.0), 0.8, size=(300, 2)),
        rng.normal((3.5, 5.0), 0.8, size=(300, 2)),
        rng.normal((6.0, 1.0), 1.0, size=(300, 2)),
    ])


def two_circles(n_total: int, seed: int = 0) -> np.ndarray:
    """Half the points on the unit circle, half on radius 2 shifted by (3, 3)."""
    rng = np.random.default_rng(seed)
    half = n_total // 2
    return np.vstack([sample_circle(half, seed=rng), sample_circle(n_total - half, r=2.0, offset=(3.0, 3.0), seed=rng)])


def check_cluster_tree(tree, n: int) -> None:
    """Structural invariants every cluster tree must satisfy."""
    by_id = {b.id: b for b in tree.branches}
    # parents and children agree, members nest
    for b in tree.branches:
        assert b.lambda_birth <= b.lambda_death
        assert 0.0 <= b.alpha_death <= b.alpha_birth <= 1.0
        assert 0.0 <= b.kappa_death <= b.kappa_birth <= 1.0
        if b.parent is not None:
            parent = by_id[b.parent]
            assert b.id in parent.children
            assert set(b.members) <= set(parent.members)
            assert b.lambda_birth == parent.lambda_death
        for c in b.children:
            assert by_id[c].parent == b.id
    # tree property on member sets
    sets = [set(b.members) for b in tree.branches]
    for a in sets:
        for b in sets:
            assert a <= b or b <= a or not (a & b)
    # own sets partition the sample; leaves are disjoint
    owned = sorted(i for b in tree.branches for i in b.own)
    assert owned == list(range(n))
    leaf_sets = [set(by_id[i].members) for i in tree.leaves]
    assert sum(map(len, leaf_sets)) == len(set().union(*leaf_sets))
    # roots together hold every point
    assert sorted(i for r in tree.roots for i in by_id[r].members) == list(range(n))


# -- acceptance report ------------------------------------------------------------------

_REPORT = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Context manager that times one acceptance criterion and records PASS or FAIL."""
    lines = request.config.stash.setdefault(_REPORT, [])

    @contextlib.contextmanager
    def run(number: int, name: str, limit: float | None = None):
        start = time.perf_counter()
        try:
            yield
            elapsed = time.perf_counter() - start
            if limit is not None and elapsed >= limit:
                raise AssertionError(f"took {elapsed:.1f} s, limit {limit:g} s")
        except BaseException as exc:
            elapsed = time.perf_counter() - start
            line = f"FAIL  {number:>2}. {name} ({elapsed:.1f} s): {str(exc).splitlines()[0] if str(exc) else type(exc).__name__}"
            lines.append((number, line))
            print(line)
            raise
        line = f"PASS  {number:>2}. {name} ({elapsed:.1f} s)"
        lines.append((number, line))
        print(line)

    return run


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_REPORT, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
