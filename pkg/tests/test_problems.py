import numpy as np
import pytest

from projquasi.errors import EmptyBatch
from projquasi.problems import (
    REGISTRY,
    convex_exp_2d,
    gen_rosenbrock,
    get_problem,
    random_quadratic,
    random_sum_quadratic,
    subsampled_hess_action,
)


def fd_grad(f, x, h=1e-6):
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def fd_hess_action(grad, x, S, h=1e-6):
    return np.column_stack([(grad(x + h * c) - grad(x - h * c)) / (2 * h) for c in S.T])


PROBLEMS = [convex_exp_2d(), gen_rosenbrock(10), gen_rosenbrock(3), random_quadratic(5, 1), random_sum_quadratic(4, 6, 2)]


@pytest.mark.parametrize("p", PROBLEMS, ids=lambda p: f"{p.name}-{p.n}")
def test_gradients_match_finite_differences(p, rng):
    for _ in range(20):
        x = rng.uniform(-1.5, 1.5, p.n)
        g, fd = p.grad(x), fd_grad(p.f, x)
        assert np.linalg.norm(g - fd) <= 1e-5 * max(np.linalg.norm(g), 1.0)


@pytest.mark.parametrize("p", PROBLEMS, ids=lambda p: f"{p.name}-{p.n}")
def test_hess_action_matches_gradient_differences(p, rng):
    x = rng.uniform(-1.0, 1.0, p.n)
    S = rng.standard_normal((p.n, 2))
    expected = fd_hess_action(p.grad, x, S)
    np.testing.assert_allclose(p.hess_action(x, S), expected, rtol=1e-5, atol=1e-5 * np.abs(expected).max())


def test_convex_exp_values():
    p = convex_exp_2d()
    assert p.f(np.array([1.0, 1.0])) == pytest.approx(2.0)
    np.testing.assert_allclose(p.grad(np.array([1.0, 1.0])), [1.0, -1.0])
    xs = p.known_minimizer
    assert np.linalg.norm(p.grad(xs)) < 1e-14
    np.testing.assert_allclose(np.round(xs, 1), [0.8, 1.2])


def test_rosenbrock_values():
    p = gen_rosenbrock(10)
    assert p.f(np.ones(10)) == 0.0
    assert not np.any(p.grad(np.ones(10)))
    assert p.f(np.zeros(10)) == 9.0
    np.testing.assert_array_equal(p.known_minimizer, np.ones(10))
    with pytest.raises(ValueError):
        gen_rosenbrock(1)


def test_quadratic_examples(rng):
    p = random_quadratic(1, A=[[2.0]], b=[0.0])
    assert p.known_minimizer[0] == 0.0
    q = random_quadratic(5, seed=3)
    x, s = rng.standard_normal(5), rng.standard_normal(5)
    A = q.hess_action(x, np.eye(5))
    np.testing.assert_allclose(q.grad(x + s) - q.grad(x), A @ s, atol=1e-12)
    assert np.linalg.norm(q.grad(q.known_minimizer)) < 1e-12


def test_sum_quadratic_structure(rng):
    p = random_sum_quadratic(4, 7, seed=5)
    x = rng.standard_normal(4)
    comps = np.array([c[1](x) for c in p.components])
    np.testing.assert_allclose(p.grad(x), comps.mean(axis=0), atol=1e-12)
    S = rng.standard_normal((4, 2))
    np.testing.assert_allclose(subsampled_hess_action(p, x, S, range(p.N)), p.hess_action(x, S), atol=1e-12)
    np.testing.assert_allclose(subsampled_hess_action(p, x, S, [3]), p.components[3][2](x, S), atol=1e-14)
    batch = [0, 2, 6]
    brute = sum(p.components[i][2](x, np.eye(4)) for i in batch) / 3 @ S
    np.testing.assert_allclose(subsampled_hess_action(p, x, S, batch), brute, atol=1e-12)
    M = S.T @ p.hess_action(x, S)
    assert np.allclose(M, M.T) and np.linalg.eigvalsh(M).min() > 0
    with pytest.raises(EmptyBatch):
        subsampled_hess_action(p, x, S, [])
    with pytest.raises(IndexError):
        subsampled_hess_action(p, x, S, [7])


def test_single_component_sum_is_a_quadratic(rng):
    p = random_sum_quadratic(3, 1, seed=0)
    x = rng.standard_normal(3)
    assert p.f(x) == pytest.approx(p.components[0][0](x))


def test_registry():
    assert set(REGISTRY) == {"convex-exp-2d", "rosenbrock-10", "quadratic", "sum-quadratic"}
    assert get_problem("rosenbrock-10").n == 10
    with pytest.raises(KeyError, match="known problems"):
        get_problem("himmelblau")
