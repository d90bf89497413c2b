"""Compiled kernels against the numpy reference."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from projquasi import _pykernels, kernels
from projquasi.errors import NotPositiveDefinite
from projquasi.numcore import random_spd

ck = kernels.BACKENDS.get("cython")
needs_ext = pytest.mark.skipif(ck is None, reason="compiled kernels not built")


def test_backend_selected():
    assert kernels.BACKEND in kernels.BACKENDS


def test_pure_python_env_forces_fallback(monkeypatch):
    monkeypatch.setenv("PROJQUASI_PURE_PYTHON", "1")
    assert kernels._select() == "python"
    monkeypatch.setenv("PROJQUASI_PURE_PYTHON", "0")
    assert kernels._select() == ("cython" if ck else "python")


def _instance(seed, n):
    rng = np.random.default_rng(seed)
    H = random_spd(n, rng)
    s, y, v = rng.standard_normal((3, n))
    if y @ s < 0:
        y = -y
    if abs(v @ y) < 1e-3:
        v = v + y
    return H, s, y, v


@needs_ext
@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 30))
def test_oblique_kernel_parity(seed, n):
    H, s, y, v = _instance(seed, n)
    a = ck.oblique_rank_update(H, s, y, v)
    b = _pykernels.oblique_rank_update(H, s, y, v)
    assert np.array_equal(a, a.T)
    np.testing.assert_allclose(a, b, rtol=1e-11, atol=1e-11 * np.abs(b).max())


@needs_ext
@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 25), m=st.integers(1, 8))
def test_two_loop_parity(seed, n, m):
    rng = np.random.default_rng(seed)
    S = rng.standard_normal((m, n))
    Y = S + 0.3 * rng.standard_normal((m, n))
    V = Y + 0.3 * rng.standard_normal((m, n))
    g = rng.standard_normal(n)
    a = ck.two_loop(S, Y, V, g, 0.7)
    b = _pykernels.two_loop(S, Y, V, g, 0.7)
    np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-9 * max(1.0, np.abs(b).max()))


@needs_ext
@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 12))
def test_gauss_kl_parity(seed, n):
    rng = np.random.default_rng(seed)
    P, Q = random_spd(n, rng, 0.1, 10.0), random_spd(n, rng, 0.1, 10.0)
    assert ck.gauss_kl(P, Q) == pytest.approx(_pykernels.gauss_kl(P, Q), rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("impl", sorted(kernels.BACKENDS))
def test_gauss_kl_rejects_indefinite(impl):
    with pytest.raises(NotPositiveDefinite):
        kernels.BACKENDS[impl].gauss_kl(np.diag([1.0, -1.0]), np.eye(2))
    with pytest.raises(NotPositiveDefinite):
        kernels.BACKENDS[impl].gauss_kl(np.eye(2), np.diag([1.0, 0.0]))


def test_two_loop_equals_dense_recursion(backend, rng):
    n, m = 6, 4
    H = np.eye(n)
    S, Y, V = [], [], []
    for _ in range(m):
        s = rng.standard_normal(n)
        y = random_spd(n, rng) @ s
        v = y + 0.5 * rng.standard_normal(n)
        H = _pykernels.oblique_rank_update(H, s, y, v)
        S.append(s), Y.append(y), V.append(v)
    g = rng.standard_normal(n)
    got = kernels.two_loop(np.array(S), np.array(Y), np.array(V), g, 1.0)
    np.testing.assert_allclose(got, H @ g, rtol=1e-10, atol=1e-12)
