import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qcutstack import _kernels_py as py
from qcutstack import kernels

cy = pytest.importorskip("qcutstack._kernels")


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 300), st.integers(0, 2**32 - 1))
def test_cycle_decompose_parity(n, seed):
    perm = np.random.default_rng(seed).permutation(n)
    a, b = py.cycle_decompose(perm), cy.cycle_decompose(perm)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_cycle_decompose_rejects_non_bijection():
    for mod in (py, cy):
        with pytest.raises(ValueError):
            mod.cycle_decompose(np.array([0, 0, 1]))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 300), st.integers(0, 2**32 - 1))
def test_orbit_gauge_parity(n, seed):
    rng = np.random.default_rng(seed)
    orbit = rng.permutation(n)[: rng.integers(1, n + 1)]
    assert np.array_equal(py.orbit_gauge(orbit, n), cy.orbit_gauge(orbit, n))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 300), st.integers(0, 2**32 - 1))
def test_greedy_nearest_parity(n, seed):
    rng = np.random.default_rng(seed)
    free = (rng.random(n) < 0.5).astype(np.uint8)
    k = int(rng.integers(0, n))
    sources = rng.permutation(n)[:k].astype(np.int64)
    targets = rng.uniform(-1, n + 1, size=k)
    assert np.array_equal(py.greedy_nearest(sources, targets, free), cy.greedy_nearest(sources, targets, free))


def test_greedy_nearest_ties_and_exhaustion():
    free = np.array([1, 0, 1, 0], dtype=np.uint8)
    for mod in (py, cy):
        out = mod.greedy_nearest(np.array([0, 1, 2]), np.array([1.0, 1.0, 1.0]), free)
        assert out.tolist() == [0, 2, -1]
        assert free.tolist() == [1, 0, 1, 0]


def test_backend_selected():
    assert kernels.BACKEND == "cython"
