"""Numerical certificates for the variational characterizations.

* BFGS minimizes ``gauss_kl(H, H_k)`` over SPD ``H`` with ``H y = s``.
* The block-oblique update minimizes it under ``H Y = S``.
* The projection update is the epsilon -> 0 limit of the minimizer of the
  regularized problem with prior ``(P + eps I) H_k (P + eps I)``.
* The projection update equals the stationarity formula
  ``P H_k P + 2 s lambda'`` with ``lambda = s / (2 y's)``.

The checks are brute force: feasible perturbations of a candidate, or a
generic descent over feasible coordinates. None of them call the closed-form
update they are checking, except as the candidate under test.
"""
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.linalg import subspace_angles

from .divergence import gauss_kl
from .driver import OptimizerConfig, Termination, minimize
from .errors import FailedToConverge, NotPositiveDefinite, ZeroVector
from .linesearch import LineSearchParams
from .numcore import as_matrix, as_vector, is_spd, random_spd, symmetrize
from .problems import Problem
from .updates import BlockSecantPair, SecantPair

STEP_FRACTIONS = (0.01, -0.01, 0.05, -0.05, 0.1, -0.1)
KL_SLACK = 1e-10


def orth_complement_projector(Y):
    """``I - Y (Y'Y)^-1 Y'`` for a vector or full-column-rank matrix ``Y``."""
    Y = as_matrix(Y)
    if not np.any(Y):
        raise ZeroVector("cannot project off a zero vector")
    Q, _ = np.linalg.qr(Y)
    return symmetrize(np.eye(Y.shape[0]) - Q @ Q.T)


def random_instance(n, rng, min_angle=10.0):
    """A well-scaled SPD ``H_k`` and a secant pair with positive curvature.

    ``y = A s`` for an SPD model Hessian ``A``; both spectra lie in [0.5, 2].
    For ``n > 1`` pairs with ``angle(s, y) < min_angle`` degrees are redrawn,
    so that ``s`` and ``y`` are clearly not parallel.
    """
    Hk = random_spd(n, rng)
    while True:
        A = random_spd(n, rng)
        s = rng.standard_normal(n)
        s /= np.linalg.norm(s)
        y = A @ s
        cos = s @ y / np.linalg.norm(y)
        if n == 1 or np.degrees(np.arccos(min(cos, 1.0))) >= min_angle:
            return Hk, SecantPair(s, y)


def random_block_instance(n, q, rng, min_angle=10.0):
    """Block analogue of :func:`random_instance`: ``Y = A S``.

    Sketches whose range is within ``min_angle`` degrees of range(Y) (largest
    principal angle) are redrawn unless ``q == n``.
    """
    Hk = random_spd(n, rng)
    while True:
        A = random_spd(n, rng)
        S = rng.standard_normal((n, q))
        Y = A @ S
        if q >= n or np.degrees(subspace_angles(S, Y).max()) >= min_angle:
            return Hk, BlockSecantPair(S, Y)


def sample_feasible_direction(y, seed=None):
    """Unit-Frobenius symmetric ``Z`` with ``Z y = 0`` (``y`` a vector or matrix).

    ``seed`` may be an int or a ``numpy.random.Generator``. In one dimension
    the only such direction is 0.
    """
    rng = np.random.default_rng(seed)
    Y = as_matrix(y)
    n = Y.shape[0]
    P = orth_complement_projector(Y)
    if Y.shape[1] >= n:
        return np.zeros((n, n))
    W = rng.standard_normal((n, n))
    Z = symmetrize(P @ (W + W.T) @ P)
    nz = np.linalg.norm(Z)
    return Z / nz if nz > 0 else Z


@dataclass
class MinimalityReport:
    trials: int = 0
    violations: int = 0
    skipped_points: int = 0
    worst_decrease: float = 0.0
    details: list = field(default_factory=list)

    @property
    def ok(self):
        return self.violations == 0

    def merge(self, other):
        self.trials += other.trials
        self.violations += other.violations
        self.skipped_points += other.skipped_points
        self.worst_decrease = max(self.worst_decrease, other.worst_decrease)
        self.details.extend(other.details)
        return self


def _perturbation_sweep(Hstar, Hk, constraint, samples, seed, slack):
    rng = np.random.default_rng(seed)
    base = gauss_kl(Hstar, Hk)
    scale = np.linalg.norm(Hstar)
    report = MinimalityReport()
    for _ in range(samples):
        Z = sample_feasible_direction(constraint, rng)
        report.trials += 1
        if not np.any(Z):
            continue
        hit = False
        for frac in STEP_FRACTIONS:
            t = frac * scale
            H = Hstar + t * Z
            try:
                val = gauss_kl(H, Hk)
            except NotPositiveDefinite:
                report.skipped_points += 1
                continue
            drop = base - val
            report.worst_decrease = max(report.worst_decrease, drop)
            if val < base - slack:
                hit = True
                report.details.append((float(t), float(drop)))
        report.violations += hit
    return report


def verify_kl_minimality(Hstar, Hk, pair, samples=200, seed=0, slack=KL_SLACK):
    """Probe ``Hstar`` against feasible perturbations ``Hstar + t Z`` (``Z y = 0``).

    A trial is one sampled direction; it is a violation if any step in
    ``STEP_FRACTIONS * |Hstar|_F`` that stays SPD lowers ``gauss_kl(., Hk)``
    by more than ``slack``.
    """
    return _perturbation_sweep(Hstar, Hk, pair.y, samples, seed, slack)


def verify_block_kl_minimality(Hstar, Hk, blk, samples=100, seed=0, slack=KL_SLACK):
    """Block analogue of :func:`verify_kl_minimality` with ``Z Y = 0``."""
    return _perturbation_sweep(Hstar, Hk, blk.Y, samples, seed, slack)


@dataclass(frozen=True)
class RegularizedPrior:
    epsilon: float
    base: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        object.__setattr__(self, "base", as_matrix(self.base))
        object.__setattr__(self, "y", as_vector(self.y))

    def matrix(self):
        """``(P + eps I) H_k (P + eps I)`` with ``P = I - y y'/y'y``."""
        Pe = orth_complement_projector(self.y) + self.epsilon * np.eye(self.y.size)
        return symmetrize(Pe @ self.base @ Pe)


def feasible_basis(y):
    """Basis ``Z_j`` of symmetric matrices with ``Z y = 0``; ``n(n-1)/2`` elements."""
    y = as_vector(y)
    n = y.size
    Q, _ = np.linalg.qr(np.column_stack([y, np.eye(n)]))
    U = Q[:, 1:n]
    basis = []
    for a in range(n - 1):
        for b in range(a, n - 1):
            E = np.zeros((n - 1, n - 1))
            E[a, b] = E[b, a] = 1.0 if a == b else np.sqrt(0.5)
            basis.append(U @ E @ U.T)
    return basis


def _central_grad(fun, c, h):
    g = np.empty_like(c)
    for j in range(c.size):
        e = np.zeros_like(c)
        e[j] = h
        g[j] = (fun(c + e) - fun(c - e)) / (2.0 * h)
    return g


def regularized_argmin(prior, pair, tol=1e-9, anchor=None, seed=0, max_iters=500):
    """Minimize ``gauss_kl(H, prior)`` over SPD ``H`` with ``H y = s`` numerically.

    ``H = anchor + sum_j c_j Z_j`` over a basis of the feasible directions;
    the coefficients are found by the package's BFGS driver using central
    finite-difference gradients. The objective is ``+inf`` off the SPD cone,
    so the line search halves back into it. The descent starts from a random
    perturbation of the anchor.
    """
    if pair.n == 1:
        return np.array([[pair.s[0] / pair.y[0]]])
    Q = prior.matrix()
    if anchor is None:
        anchor = _feasible_anchor(pair)
    basis = feasible_basis(pair.y)
    stack = np.array(basis)

    def build(c):
        return anchor + np.tensordot(c, stack, axes=1)

    def objective(c):
        try:
            return gauss_kl(build(c), Q)
        except NotPositiveDefinite:
            return np.inf

    h = 1e-6
    rng = np.random.default_rng(seed)
    c0 = 0.1 * rng.standard_normal(len(basis))
    while not np.isfinite(objective(c0)):
        c0 *= 0.5
    problem = Problem("regularized-kl", len(basis), objective, lambda c: _central_grad(objective, c, h))
    cfg = OptimizerConfig(
        max_iters=max_iters, grad_tol=tol, check_secant=False,
        ls_params=LineSearchParams(max_evals=80),
    )
    run = minimize(problem, c0, cfg)
    if run.termination is not Termination.CONVERGED:
        gn = run.records[-1].grad_norm
        if not gn < 100 * tol:
            raise FailedToConverge(f"regularized descent stopped with |grad| = {gn:.2e}")
    return build(run.x)


def _feasible_anchor(pair):
    """A simple feasible SPD point, independent of the update rules:
    ``s s'/y's + c (I - Pi_y)`` scaled to the problem."""
    P = orth_complement_projector(pair.y)
    H = np.outer(pair.s, pair.s) / pair.rho
    # H y = s since P y = 0; adding P keeps it feasible and makes it SPD
    # whenever s is not in y-perp, which y's > 0 guarantees
    return symmetrize(H + P)


def regularized_closed_form(prior, pair):
    """Stationary point of the regularized problem solved in closed form.

    ``H = Q + s l' + l s'`` with ``Q`` the regularized prior and ``l`` chosen
    so that ``H y = s``. Used to cross-check :func:`regularized_argmin`.
    """
    Q = prior.matrix()
    s, y, rho = pair.s, pair.y, pair.rho
    a = (rho - y @ Q @ y) / (2.0 * rho)
    lam = (s - Q @ y - a * s) / rho
    return symmetrize(Q + np.outer(s, lam) + np.outer(lam, s))


class Stationarity(NamedTuple):
    residual: float
    two_lambda_y: float


def check_stationarity(Hstar, Hk, pair):
    """Compare ``Hstar`` against ``P H_k P + 2 s lambda'`` with ``lambda = s/(2 y's)``.

    Returns the Frobenius residual and ``2 lambda'y`` (which must be 1).
    """
    P = orth_complement_projector(pair.y)
    lam = pair.s / (2.0 * pair.rho)
    rhs = symmetrize(P @ Hk @ P + 2.0 * np.outer(pair.s, lam))
    return Stationarity(float(np.linalg.norm(Hstar - rhs)), float(2.0 * lam @ pair.y))


def oblique_prior(Hk, pair, eps):
    """``(T + eps I)' H_k (T + eps I)`` with ``T = I - y s'/y's``."""
    T = np.eye(pair.n) - np.outer(pair.y, pair.s) / pair.rho + eps * np.eye(pair.n)
    return T.T @ Hk @ T


def trace_term_spread(Hk, pair, eps, samples=50, seed=0):
    """Spread, over feasible ``H``, of the ``H``-dependent part of
    ``gauss_kl(H, Hk) - gauss_kl(H, oblique_prior(Hk, pair, eps))``.

    That part is ``trace((Hk - prior) H^-1) / 2``; its spread is 0 at
    ``eps = 0`` and grows like ``eps`` otherwise. Returns the spread divided
    by the mean absolute value of the trace term.
    """
    rng = np.random.default_rng(seed)
    prior = oblique_prior(Hk, pair, eps)
    D = Hk - prior
    anchor = _feasible_anchor(pair)
    vals, mags = [], []
    while len(vals) < samples:
        Z = sample_feasible_direction(pair.y, rng)
        H = anchor + rng.uniform(-0.5, 0.5) * Z
        if not is_spd(H):
            continue
        Hinv = np.linalg.inv(H)
        vals.append(0.5 * np.trace(D @ Hinv))
        mags.append(0.5 * abs(np.trace(Hk @ Hinv)))
    vals = np.array(vals)
    return float((vals.max() - vals.min()) / np.mean(mags))
