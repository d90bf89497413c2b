"""Step-length selection: strong Wolfe (bracketing + bisection zoom) and
backtracking Armijo."""
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import MaxEvalsExceeded, NotDescentDirection


@dataclass(frozen=True)
class LineSearchParams:
    c1: float = 1e-4
    c2: float = 0.9
    alpha0: float = 1.0
    alpha_max: float = 1e6
    max_evals: int = 60

    def __post_init__(self):
        if not 0.0 < self.c1 < self.c2 < 1.0:
            raise ValueError(f"need 0 < c1 < c2 < 1, got c1={self.c1}, c2={self.c2}")
        if not self.alpha0 > 0.0:
            raise ValueError("alpha0 must be positive")
        if not self.alpha_max > 0.0:
            raise ValueError("alpha_max must be positive")
        if self.max_evals < 1:
            raise ValueError("max_evals must be >= 1")


class LineSearchResult(NamedTuple):
    alpha: float
    evals: int
    # False when only the Armijo condition could be met within max_evals
    wolfe: bool = True


def _finite(v):
    return v if math.isfinite(v) else math.inf


class _Phi:
    """phi(a) = f(x + a d) and its derivative, with an eval counter."""

    def __init__(self, f_eval, g_eval, x, d):
        self.f_eval = f_eval
        self.g_eval = g_eval
        self.x = x
        self.d = d
        self.evals = 0

    def value(self, a):
        self.evals += 1
        with np.errstate(all="ignore"):
            return _finite(float(self.f_eval(self.x + a * self.d)))

    def both(self, a):
        self.evals += 1
        xa = self.x + a * self.d
        with np.errstate(all="ignore"):
            fa = _finite(float(self.f_eval(xa)))
            if fa == math.inf:
                return fa, math.nan
            da = float(np.dot(self.g_eval(xa), self.d))
        return fa, da


def _initial_slope(g_eval, x, d):
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    dphi0 = float(np.dot(g_eval(x), d))
    if not dphi0 < 0.0:
        raise NotDescentDirection(f"g'd = {dphi0:.3e} is not negative")
    return x, d, dphi0


def strong_wolfe(f_eval, g_eval, x, d, params=None):
    """Find ``alpha`` with sufficient decrease and ``|phi'(alpha)| <= c2 |phi'(0)|``.

    If the curvature condition cannot be met within ``params.max_evals``
    evaluations, the best Armijo point seen is returned with ``wolfe=False``.
    Raises MaxEvalsExceeded when not even an Armijo point was found.
    """
    p = params or LineSearchParams()
    x, d, dphi0 = _initial_slope(g_eval, x, d)
    phi = _Phi(f_eval, g_eval, x, d)
    f0 = float(f_eval(x))
    best = None  # (f, alpha) of the lowest Armijo point

    def armijo(a, fa):
        return fa <= f0 + p.c1 * a * dphi0 and fa < f0

    def note(a, fa):
        nonlocal best
        if armijo(a, fa) and (best is None or fa < best[0]):
            best = (fa, a)

    def curvature(da):
        return abs(da) <= -p.c2 * dphi0

    def zoom(lo, f_lo, hi):
        while phi.evals < p.max_evals:
            a = 0.5 * (lo + hi)
            fa, da = phi.both(a)
            note(a, fa)
            if not armijo(a, fa) or fa >= f_lo:
                hi = a
            else:
                if curvature(da):
                    return a
                if da * (hi - lo) >= 0.0:
                    hi = lo
                lo, f_lo = a, fa
        return None

    a_prev, f_prev = 0.0, f0
    a = min(p.alpha0, p.alpha_max)
    found = None
    first = True
    while phi.evals < p.max_evals:
        fa, da = phi.both(a)
        note(a, fa)
        if not armijo(a, fa) or (not first and fa >= f_prev):
            found = zoom(a_prev, f_prev, a)
            break
        if curvature(da):
            found = a
            break
        if da >= 0.0:
            found = zoom(a, fa, a_prev)
            break
        if a >= p.alpha_max:
            break
        a_prev, f_prev = a, fa
        a = min(2.0 * a, p.alpha_max)
        first = False

    if found is not None:
        return LineSearchResult(found, phi.evals, True)
    if best is None:
        raise MaxEvalsExceeded(f"no sufficient-decrease step in {phi.evals} evaluations")
    return LineSearchResult(best[1], phi.evals, False)


def backtracking_armijo(f_eval, g_eval, x, d, params=None, beta=0.5):
    """Largest ``alpha0 * beta**j`` (capped at alpha_max) meeting the Armijo condition."""
    p = params or LineSearchParams()
    x, d, dphi0 = _initial_slope(g_eval, x, d)
    phi = _Phi(f_eval, g_eval, x, d)
    f0 = float(f_eval(x))
    a = min(p.alpha0, p.alpha_max)
    while phi.evals < p.max_evals:
        fa = phi.value(a)
        if fa <= f0 + p.c1 * a * dphi0 and fa < f0:
            return LineSearchResult(a, phi.evals, False)
        a *= beta
    raise MaxEvalsExceeded(f"no sufficient-decrease step in {phi.evals} evaluations")


def exact_quadratic(hess_action, g_eval, x, d):
    """Exact minimizer of a quadratic along ``d``: ``-g'd / d'Ad``."""
    x, d, dphi0 = _initial_slope(g_eval, x, d)
    curv = float(d @ hess_action(x, d[:, None])[:, 0])
    if not curv > 0.0:
        raise NotDescentDirection("non-positive curvature along d")
    return LineSearchResult(-dphi0 / curv, 1, True)
