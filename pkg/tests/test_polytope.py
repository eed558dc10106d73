import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mpcodes.core import MultiplicityVector
from mpcodes.polytope import (
    NotInHull,
    decompose,
    in_hull,
    project_capped_sum,
    project_capped_sum_batch,
    project_capped_sum_sorted,
    project_simplex,
)

from oracles import bisect_projection

vecs = arrays(np.float64, st.integers(1, 30), elements=st.floats(-5, 5))


@settings(max_examples=200, deadline=None)
@given(vecs)
def test_simplex_matches_oracle(v):
    assert np.allclose(project_simplex(v), bisect_projection(v, 1.0, np.inf)[0], atol=1e-9)


@settings(max_examples=200, deadline=None)
@given(vecs, st.floats(0, 1), st.sampled_from([None, 1, 3]))
def test_capped_matches_oracle(v, frac, sample):
    r = frac * v.size
    x = project_capped_sum(v, r, pivot_sample=sample)
    assert np.allclose(x, bisect_projection(v, r)[0], atol=1e-9)
    assert np.allclose(project_capped_sum_sorted(v, r), x, atol=1e-9)


def test_worked_projection():
    assert np.allclose(project_capped_sum([2, 2, -1], 2), [1, 1, 0], atol=1e-9)


def test_projection_properties(rng):
    for _ in range(200):
        n = int(rng.integers(2, 12))
        r = float(rng.integers(1, n))
        u, v = rng.normal(size=(2, n)) * 2
        pu, pv = project_capped_sum(u, r), project_capped_sum(v, r)
        assert np.allclose(project_capped_sum(pu, r), pu, atol=1e-12)
        assert np.linalg.norm(pu - pv) <= np.linalg.norm(u - v) + 1e-12
        perm = rng.permutation(n)
        assert np.allclose(project_capped_sum(u[perm], r), pu[perm], atol=1e-12)


def test_weighted_batch_projection(rng):
    # weight-2 coordinate behaves like two tied unit coordinates
    for _ in range(100):
        v = rng.normal(size=4)
        w = np.array([2.0, 1.0, 1.0, 1.0])
        x = project_capped_sum_batch(v[None], 2.0, w[None])[0]
        dup = project_capped_sum(np.concatenate([[v[0]], v]), 2.0)
        assert np.allclose(x, dup[1:], atol=1e-9)


def test_capped_rejects_bad_target():
    with pytest.raises(ValueError):
        project_capped_sum([0.1, 0.2], 3)


def test_in_hull():
    r = MultiplicityVector((1, 2))
    assert in_hull([[1 / 3] * 3, [2 / 3] * 3], r)
    assert not in_hull([[0.5] * 3, [0.5] * 3], r)


def _random_hull_point(mult, rng, k=6):
    from mpcodes.core import to_matrix
    from mpcodes.ranking import unrank_mp

    w = rng.dirichlet(np.ones(k))
    mats = [to_matrix(unrank_mp(int(rng.integers(mult.size)), mult)).X for _ in range(k)]
    return sum(a * M for a, M in zip(w, mats))


def test_decompose_reconstructs(rng):
    for r in [(2, 2, 2), (1, 2, 1), (3, 1)]:
        mult = MultiplicityVector(r)
        for _ in range(20):
            Z = _random_hull_point(mult, rng)
            terms = decompose(Z, mult)
            assert abs(sum(w for w, _ in terms) - 1) < 1e-12
            assert len(terms) <= (mult.m - 1) * mult.n + 1
            assert np.abs(sum(w * X.X for w, X in terms) - Z).max() < 1e-9


def test_decompose_rejects_outside():
    with pytest.raises(NotInHull):
        decompose(np.full((2, 2), 0.7), (1, 1))
