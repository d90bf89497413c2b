import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from projquasi.errors import (
    BlockCurvatureViolation,
    CurvatureViolation,
    DegenerateDirection,
    RankDeficientSketch,
    ZeroVector,
)
from projquasi.numcore import min_eigenvalue, random_spd
from projquasi.updates import (
    BlockSecantPair,
    SecantPair,
    bfgs_update,
    block_oblique_update,
    block_orth_update,
    block_secant_residual,
    curvature_ok,
    oblique_update,
    proj_update,
    secant_residual,
)


def dense_bfgs(H, s, y):
    rho = y @ s
    L = np.eye(len(s)) - np.outer(s, y) / rho
    return L @ H @ L.T + np.outer(s, s) / rho


def dense_proj(H, s, y):
    P = np.eye(len(s)) - np.outer(y, y) / (y @ y)
    return P @ H @ P + np.outer(s, s) / (y @ s)


def random_pair(n, rng):
    s = rng.standard_normal(n)
    return SecantPair(s, random_spd(n, rng, 0.2, 5.0) @ s)


def assert_valid(Hp, pair):
    assert np.array_equal(Hp, Hp.T)
    assert secant_residual(Hp, pair) <= 1e-10
    assert min_eigenvalue(Hp) > 0


def test_curvature_examples():
    assert curvature_ok(SecantPair([1.0, 0.0], [1.0, 0.0]), 1e-10)
    assert not curvature_ok(SecantPair([1.0, 0.0], [0.0, 1.0]))
    assert not curvature_ok(SecantPair([1.0, 1.0], [1.0, -1.0]))


@pytest.mark.parametrize("H", [1.0, 0.01, 37.0])
def test_one_dimensional_collapse(backend, H):
    pair = SecantPair([2.0], [4.0])
    Hm = np.array([[H]])
    for out in (bfgs_update(Hm, pair), proj_update(Hm, pair), oblique_update(Hm, pair, [3.0])):
        assert out[0, 0] == pytest.approx(0.5, rel=1e-15)
    blk = BlockSecantPair([[2.0]], [[4.0]])
    for out in (block_orth_update(Hm, blk), block_oblique_update(Hm, blk)):
        assert out[0, 0] == pytest.approx(0.5, rel=1e-15)


def test_bfgs_fixed_point(backend, rng):
    H = random_spd(5, rng)
    y = rng.standard_normal(5)
    pair = SecantPair(H @ y, y)
    np.testing.assert_allclose(bfgs_update(H, pair), H, rtol=1e-12, atol=1e-13)


def test_proj_identity_example(backend, rng):
    s = rng.standard_normal(4)
    np.testing.assert_allclose(proj_update(np.eye(4), SecantPair(s, s)), np.eye(4), atol=1e-14)


def test_updates_against_dense_formulas(backend, rng):
    for _ in range(50):
        n = int(rng.integers(2, 12))
        H, pair = random_spd(n, rng), random_pair(n, rng)
        np.testing.assert_allclose(bfgs_update(H, pair), dense_bfgs(H, pair.s, pair.y), rtol=1e-12, atol=1e-13)
        np.testing.assert_allclose(proj_update(H, pair), dense_proj(H, pair.s, pair.y), rtol=1e-12, atol=1e-13)


def test_proj_differs_from_bfgs(backend, rng):
    H, pair = random_spd(5, rng), random_pair(5, rng)
    assert_valid(proj_update(H, pair), pair)
    assert np.linalg.norm(proj_update(H, pair) - bfgs_update(H, pair)) > 1e-3


def test_family_coherence(backend, rng):
    for _ in range(100):
        n = int(rng.integers(2, 15))
        H, pair = random_spd(n, rng), random_pair(n, rng)
        b, p = bfgs_update(H, pair), proj_update(H, pair)
        os_, oy = oblique_update(H, pair, pair.s), oblique_update(H, pair, pair.y)
        assert np.max(np.abs(os_ - b)) <= 1e-13 * np.max(np.abs(b))
        assert np.max(np.abs(oy - p)) <= 1e-13 * np.max(np.abs(p))


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 20))
def test_random_oblique_directions_valid(seed, n):
    rng = np.random.default_rng(seed)
    H, pair = random_spd(n, rng), random_pair(n, rng)
    v = rng.standard_normal(n)
    if abs(v @ pair.y) < 0.1 * np.linalg.norm(v) * np.linalg.norm(pair.y):
        v = v + pair.y
    assert_valid(oblique_update(H, pair, v), pair)


def test_update_errors(rng):
    H = np.eye(2)
    with pytest.raises(CurvatureViolation):
        bfgs_update(H, SecantPair([1.0, 0.0], [0.0, 1.0]))
    with pytest.raises(CurvatureViolation):
        proj_update(H, SecantPair([1.0, 0.0], [-1.0, 0.0]))
    with pytest.raises(ZeroVector):
        proj_update(H, SecantPair([1.0, 0.0], [0.0, 0.0]))
    with pytest.raises(DegenerateDirection):
        oblique_update(H, SecantPair([1.0, 0.0], [1.0, 0.0]), [0.0, 1.0])


def block_instance(n, q, rng):
    S = rng.standard_normal((n, q))
    return BlockSecantPair(S, random_spd(n, rng, 0.2, 5.0) @ S)


@pytest.mark.parametrize("rule", [block_orth_update, block_oblique_update])
def test_block_properties(rule, rng):
    for _ in range(50):
        H, blk = random_spd(6, rng), block_instance(6, 2, rng)
        Hp = rule(H, blk)
        assert np.array_equal(Hp, Hp.T)
        assert np.linalg.norm(Hp @ blk.Y - blk.S) < 1e-10
        assert block_secant_residual(Hp, blk) <= 1e-10
        assert min_eigenvalue(Hp) > 0


@pytest.mark.parametrize("rule", [block_orth_update, block_oblique_update])
def test_block_full_rank_sketch_ignores_prior(rule, rng):
    blk = block_instance(5, 5, rng)
    target = blk.S @ np.linalg.solve(blk.S.T @ blk.Y, blk.S.T)
    for H in (np.eye(5), random_spd(5, rng, 0.1, 10.0)):
        np.testing.assert_allclose(rule(H, blk), 0.5 * (target + target.T), rtol=1e-8, atol=1e-9)


def test_block_q1_reduces_to_vector(backend, rng):
    for _ in range(50):
        n = int(rng.integers(2, 10))
        H, pair = random_spd(n, rng), random_pair(n, rng)
        blk = BlockSecantPair(pair.s[:, None], pair.y[:, None])
        for block_rule, vec_rule in ((block_orth_update, proj_update), (block_oblique_update, bfgs_update)):
            a, b = block_rule(H, blk), vec_rule(H, pair)
            assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(b))


def test_block_errors(rng):
    S = rng.standard_normal((4, 2))
    with pytest.raises(BlockCurvatureViolation):
        block_oblique_update(np.eye(4), BlockSecantPair(S, -S))
    with pytest.raises(RankDeficientSketch):
        block_orth_update(np.eye(4), BlockSecantPair(np.column_stack([S[:, 0], S[:, 0]]), np.column_stack([S[:, 0], S[:, 0]])))
