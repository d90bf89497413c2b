"""Closed-form inverse-Hessian updates.

Every rule maps the current inverse approximation ``H`` (an SPD matrix) and
secant data to a new SPD matrix satisfying the (block) secant equation
``H+ y = s`` (``H+ Y = S``). The vector rules are all members of one
family::

    H+ = (I - P)' H (I - P) + s s' / (y's),     P = y v' / (y'v)

with ``v = s`` giving BFGS and ``v = y`` giving the orthogonal-projection
rule. They share one compiled kernel.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (
    BlockCurvatureViolation,
    CurvatureViolation,
    DegenerateDirection,
    DimensionMismatch,
    NotPositiveDefinite,
    RankDeficientSketch,
    ZeroVector,
)
from .numcore import as_matrix, as_vector, spd_factorize, symmetrize

EPS_CURVATURE = 1e-10
EPS_DIRECTION = 1e-12
EPS_RANK = 1e-10


@dataclass(frozen=True)
class SecantPair:
    s: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        s = as_vector(self.s)
        y = as_vector(self.y)
        if s.shape != y.shape:
            raise DimensionMismatch(f"s has {s.size} entries, y has {y.size}")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.s.size

    @property
    def rho(self):
        return float(self.y @ self.s)


@dataclass(frozen=True)
class BlockSecantPair:
    """Sketch ``S`` (n x q) and Hessian action ``Y`` (n x q)."""

    S: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        S = as_matrix(self.S)
        Y = as_matrix(self.Y)
        if S.shape != Y.shape:
            raise DimensionMismatch(f"S is {S.shape}, Y is {Y.shape}")
        if S.shape[1] > S.shape[0]:
            raise DimensionMismatch(f"sketch has q={S.shape[1]} > n={S.shape[0]} columns")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "Y", Y)

    @property
    def n(self):
        return self.S.shape[0]

    @property
    def q(self):
        return self.S.shape[1]

    def column(self, j):
        return SecantPair(self.S[:, j], self.Y[:, j])


def curvature_ok(pair, eps_c=EPS_CURVATURE):
    """True iff ``y's > eps_c * |y| * |s|``."""
    ny = np.linalg.norm(pair.y)
    ns = np.linalg.norm(pair.s)
    return bool(pair.rho > eps_c * ny * ns)


def secant_residual(H, pair):
    """Relative residual ``|H y - s| / (|H| |y| + |s|)`` (2-norms)."""
    r = np.linalg.norm(H @ pair.y - pair.s)
    scale = np.linalg.norm(H, 2) * np.linalg.norm(pair.y) + np.linalg.norm(pair.s)
    return float(r / scale) if scale > 0 else float(r)


def block_secant_residual(H, blk):
    """Largest columnwise relative residual of ``H Y = S``."""
    normH = np.linalg.norm(H, 2)
    worst = 0.0
    for j in range(blk.q):
        r = np.linalg.norm(H @ blk.Y[:, j] - blk.S[:, j])
        scale = normH * np.linalg.norm(blk.Y[:, j]) + np.linalg.norm(blk.S[:, j])
        worst = max(worst, r / scale if scale > 0 else r)
    return float(worst)


def _prepare(H, pair):
    H = np.ascontiguousarray(H, dtype=float)
    if H.shape != (pair.n, pair.n):
        raise DimensionMismatch(f"H is {H.shape}, pair has dimension {pair.n}")
    if not curvature_ok(pair):
        raise CurvatureViolation(f"y's = {pair.rho:.3e} fails the curvature test")
    return H


def oblique_update(H, pair, v):
    """Oblique-projection update with direction ``v`` (``v'y != 0``)."""
    H = _prepare(H, pair)
    v = as_vector(v)
    if v.shape != pair.y.shape:
        raise DimensionMismatch(f"v has {v.size} entries, pair has dimension {pair.n}")
    if abs(v @ pair.y) <= EPS_DIRECTION * np.linalg.norm(v) * np.linalg.norm(pair.y):
        raise DegenerateDirection("v is orthogonal to y")
    return kernels.oblique_rank_update(H, pair.s, pair.y, v)


def bfgs_update(H, pair):
    """Standard inverse BFGS: ``(I - s y'/rho) H (I - y s'/rho) + s s'/rho``."""
    H = _prepare(H, pair)
    return kernels.oblique_rank_update(H, pair.s, pair.y, pair.s)


def proj_update(H, pair):
    """Orthogonal-projection update ``(I - Pi_y) H (I - Pi_y) + s s'/rho``."""
    if not np.any(pair.y):
        raise ZeroVector("y = 0")
    H = _prepare(H, pair)
    return kernels.oblique_rank_update(H, pair.s, pair.y, pair.y)


def _block_gram(blk):
    """Factor of ``sym(S'Y)``; raises BlockCurvatureViolation if not SPD."""
    M = symmetrize(blk.S.T @ blk.Y)
    try:
        return spd_factorize(M)
    except NotPositiveDefinite:
        raise BlockCurvatureViolation("S'Y is not positive definite") from None


def _check_block(H, blk):
    H = np.asarray(H, dtype=float)
    if H.shape != (blk.n, blk.n):
        raise DimensionMismatch(f"H is {H.shape}, block pair has dimension {blk.n}")
    return H


def block_orth_update(H, blk):
    """``(I - Pi_Y) H (I - Pi_Y) + S (S'Y)^-1 S'`` with ``Pi_Y`` orthogonal onto range(Y)."""
    H = _check_block(H, blk)
    Q, R = np.linalg.qr(blk.Y)
    d = np.abs(np.diag(R))
    if d.size and d.min() <= EPS_RANK * max(d.max(), np.finfo(float).tiny):
        raise RankDeficientSketch("Y does not have full column rank")
    fac = _block_gram(blk)
    # (I - QQ') H (I - QQ') without forming the projector
    HQ = H @ Q
    QtHQ = Q.T @ HQ
    proj = H - HQ @ Q.T - Q @ HQ.T + Q @ QtHQ @ Q.T
    out = proj + blk.S @ fac.solve(blk.S.T)
    return symmetrize(out)


def block_oblique_update(H, blk):
    """``E' H E + S (S'Y)^-1 S'`` with ``E = I - Y (S'Y)^-1 S'``."""
    H = _check_block(H, blk)
    fac = _block_gram(blk)
    E = np.eye(blk.n) - blk.Y @ fac.solve(blk.S.T)
    out = E.T @ H @ E + blk.S @ fac.solve(blk.S.T)
    return symmetrize(out)
