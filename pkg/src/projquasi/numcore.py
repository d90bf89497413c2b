"""Dense symmetric / SPD linear algebra used throughout the package.

Vectors and matrices are plain ``numpy`` float arrays. Positive definiteness
is decided by Cholesky success, never by an eigen-decomposition, except in
:func:`min_eigenvalue` which exists for verification.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionMismatch, NotPositiveDefinite


def as_vector(x):
    v = np.array(x, dtype=float, copy=True).reshape(-1)
    if v.size == 0:
        raise DimensionMismatch("empty vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def as_matrix(a):
    m = np.array(a, dtype=float, copy=True)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    elif m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def symmetrize(a):
    """Return ``(A + A') / 2``; the result is exactly symmetric."""
    a = np.asarray(a, dtype=float)
    return 0.5 * (a + a.T)


def is_symmetric(a, tol=0.0):
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return bool(np.max(np.abs(a - a.T), initial=0.0) <= tol)


@dataclass(frozen=True)
class SPDFactorization:
    """Lower Cholesky factor ``L`` with ``A = L L'``."""

    L: np.ndarray

    @property
    def n(self):
        return self.L.shape[0]

    def logdet(self):
        return 2.0 * float(np.sum(np.log(np.diag(self.L))))

    def solve(self, b):
        b = np.asarray(b, dtype=float)
        if b.shape[0] != self.n:
            raise DimensionMismatch(f"rhs has {b.shape[0]} rows, matrix is {self.n}x{self.n}")
        z = solve_triangular(self.L, b, lower=True, check_finite=False)
        return solve_triangular(self.L, z, lower=True, trans="T", check_finite=False)

    def inverse(self):
        return symmetrize(self.solve(np.eye(self.n)))


def spd_factorize(a):
    """Cholesky-factorize a symmetric matrix.

    Raises :class:`NotPositiveDefinite` iff the factorization breaks down,
    i.e. ``a`` is not numerically positive definite.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NotPositiveDefinite("matrix has non-finite entries")
    try:
        L = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    if not np.all(np.diag(L) > 0.0):
        raise NotPositiveDefinite("zero pivot in Cholesky factor")
    return SPDFactorization(L)


def is_spd(a):
    try:
        spd_factorize(a)
    except NotPositiveDefinite:
        return False
    return True


def spd_solve(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or b.shape[0] != a.shape[0]:
        raise DimensionMismatch(f"cannot solve {a.shape} system with rhs {b.shape}")
    return spd_factorize(a).solve(b)


def logdet(a):
    """Natural log-determinant of an SPD matrix, from its Cholesky factor."""
    return spd_factorize(a).logdet()


def min_eigenvalue(a):
    a = np.asarray(a, dtype=float)
    return float(np.linalg.eigvalsh(symmetrize(a))[0])


def random_spd(n, rng, low=0.5, high=2.0):
    """Random SPD matrix with spectrum drawn uniformly from ``[low, high]``."""
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    lam = rng.uniform(low, high, size=n)
    return symmetrize((q * lam) @ q.T)
