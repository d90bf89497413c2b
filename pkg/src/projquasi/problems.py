"""Benchmark objectives: the two test functions used in the experiments,
random quadratics, and sum-structured quadratics with sub-sampled Hessian
actions for the block updates."""
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .errors import EmptyBatch, FailedToConverge
from .numcore import as_vector, random_spd, spd_solve


@dataclass(frozen=True)
class Problem:
    name: str
    n: int
    f: Callable
    grad: Callable
    hess_action: Optional[Callable] = None
    minimizer: Optional[Callable] = field(default=None, repr=False)

    @cached_property
    def known_minimizer(self):
        return None if self.minimizer is None else self.minimizer()


@dataclass(frozen=True)
class SumProblem(Problem):
    """``f = (1/N) sum_i f_i`` with per-component gradients and Hessian actions."""

    components: tuple = ()

    @property
    def N(self):
        return len(self.components)


def _newton(grad, hess, x0, tol=1e-14, max_iter=100):
    x = np.array(x0, dtype=float)
    for _ in range(max_iter):
        g = grad(x)
        if np.linalg.norm(g) < tol:
            return x
        x = x - np.linalg.solve(hess(x), g)
    if np.linalg.norm(grad(x)) < 10 * tol:
        return x
    raise FailedToConverge("Newton iteration did not reach the gradient tolerance")


def convex_exp_2d():
    """``f(x1, x2) = exp(x1 - 1) + exp(1 - x2) + (x1 - x2)^2``."""

    def f(x):
        return np.exp(x[0] - 1.0) + np.exp(1.0 - x[1]) + (x[0] - x[1]) ** 2

    def grad(x):
        d = 2.0 * (x[0] - x[1])
        return np.array([np.exp(x[0] - 1.0) + d, -np.exp(1.0 - x[1]) - d])

    def hess(x):
        return np.array([[np.exp(x[0] - 1.0) + 2.0, -2.0], [-2.0, np.exp(1.0 - x[1]) + 2.0]])

    def hess_action(x, S):
        return hess(x) @ S

    return Problem(
        "convex-exp-2d", 2, f, grad, hess_action,
        minimizer=lambda: _newton(grad, hess, [1.0, 1.0]),
    )


def gen_rosenbrock(n=10):
    """Generalized Rosenbrock ``sum 100 (x[i+1] - x[i]^2)^2 + (x[i] - 1)^2``."""
    if n < 2:
        raise ValueError("Rosenbrock needs n >= 2")

    def f(x):
        x = np.asarray(x, dtype=float)
        return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (x[:-1] - 1.0) ** 2))

    def grad(x):
        x = np.asarray(x, dtype=float)
        r = x[1:] - x[:-1] ** 2
        g = np.zeros_like(x)
        g[:-1] = -400.0 * x[:-1] * r + 2.0 * (x[:-1] - 1.0)
        g[1:] += 200.0 * r
        return g

    def hess_action(x, S):
        x = np.asarray(x, dtype=float)
        S = np.asarray(S, dtype=float)
        diag = np.zeros(n)
        diag[:-1] = 1200.0 * x[:-1] ** 2 - 400.0 * x[1:] + 2.0
        diag[1:] += 200.0
        off = -400.0 * x[:-1]
        out = diag[:, None] * S
        out[:-1] += off[:, None] * S[1:]
        out[1:] += off[:, None] * S[:-1]
        return out

    return Problem(f"rosenbrock-{n}", n, f, grad, hess_action, minimizer=lambda: np.ones(n))


def _quadratic_parts(A, b):
    def f(x):
        return float(0.5 * x @ A @ x - b @ x)

    def grad(x):
        return A @ x - b

    def hess_action(x, S):
        return A @ S

    return f, grad, hess_action


def random_quadratic(n, seed=0, A=None, b=None):
    """``f = x'Ax/2 - b'x`` with a seeded SPD ``A`` (spectrum in [0.5, 10])."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    A = random_spd(n, rng, 0.5, 10.0) if A is None else np.atleast_2d(np.asarray(A, dtype=float))
    b = rng.standard_normal(n) if b is None else as_vector(b)
    f, grad, hess_action = _quadratic_parts(A, b)
    return Problem("quadratic", n, f, grad, hess_action, minimizer=lambda: spd_solve(A, b))


def random_sum_quadratic(n, N, seed=0):
    """Average of ``N`` convex quadratics with distinct SPD Hessians."""
    if n < 1 or N < 1:
        raise ValueError("need n >= 1 and N >= 1")
    rng = np.random.default_rng(seed)
    comps = []
    for _ in range(N):
        A = random_spd(n, rng, 0.5, 10.0)
        b = rng.standard_normal(n)
        comps.append(_quadratic_parts(A, b))
    Abar = sum(c[2](None, np.eye(n)) for c in comps) / N
    bbar = -sum(c[1](np.zeros(n)) for c in comps) / N

    def f(x):
        return sum(c[0](x) for c in comps) / N

    def grad(x):
        return sum(c[1](x) for c in comps) / N

    def hess_action(x, S):
        return sum(c[2](x, S) for c in comps) / N

    return SumProblem(
        "sum-quadratic", n, f, grad, hess_action,
        minimizer=lambda: spd_solve(Abar, bbar),
        components=tuple(comps),
    )


def subsampled_hess_action(p, x, S, batch):
    """Average Hessian action ``(1/|T|) sum_{i in T} H_i(x) S`` over a batch."""
    batch = list(batch)
    if not batch:
        raise EmptyBatch("batch must be non-empty")
    for i in batch:
        if not 0 <= i < p.N:
            raise IndexError(f"component index {i} out of range for N={p.N}")
    S = np.asarray(S, dtype=float)
    if S.ndim == 1:
        S = S[:, None]
    return sum(p.components[i][2](x, S) for i in batch) / len(batch)


def _quadratic_entry(n=5, seed=0, **_):
    return random_quadratic(n, seed)


def _sum_quadratic_entry(n=8, N=32, seed=0, **_):
    return random_sum_quadratic(n, N, seed)


REGISTRY = {
    "convex-exp-2d": lambda **_: convex_exp_2d(),
    "rosenbrock-10": lambda **_: gen_rosenbrock(10),
    "quadratic": _quadratic_entry,
    "sum-quadratic": _sum_quadratic_entry,
}

DEFAULT_X0 = {
    "convex-exp-2d": (5.0, -7.0),
}


def get_problem(name, **kwargs):
    try:
        factory = REGISTRY[name]
    except KeyError:
        raise KeyError(
            f"unknown problem {name!r}; known problems: {', '.join(sorted(REGISTRY))}"
        ) from None
    return factory(**kwargs)
