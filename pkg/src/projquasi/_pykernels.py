"""Pure numpy implementations of the hot kernels.

Same signatures as the compiled ``_ckernels`` extension; used when the
extension is unavailable or ``PROJQUASI_PURE_PYTHON=1`` is set.
"""
import numpy as np
from scipy.linalg import solve_triangular

from .errors import NotPositiveDefinite


def oblique_rank_update(H, s, y, v):
    # (I - v y'/c) H (I - y v'/c) + s s'/rho  with  c = y'v, rho = y's
    u = H @ y
    c = float(y @ v)
    rho = float(y @ s)
    w = float(y @ u)
    out = H - (np.outer(u, v) + np.outer(v, u)) / c
    out += (w / (c * c)) * np.outer(v, v)
    out += np.outer(s, s) / rho
    return 0.5 * (out + out.T)


def two_loop(S, Y, V, g, gamma):
    """Apply the m-fold oblique recursion started from ``gamma * I`` to ``g``.

    Rows of S, Y, V hold the pairs oldest first.
    """
    m = S.shape[0]
    q = np.array(g, dtype=float, copy=True)
    beta = np.empty(m)
    rho = np.einsum("ij,ij->i", S, Y)
    c = np.einsum("ij,ij->i", V, Y)
    for i in range(m - 1, -1, -1):
        beta[i] = (S[i] @ q) / rho[i]
        q -= Y[i] * ((V[i] @ q) / c[i])
    r = gamma * q
    for i in range(m):
        r += S[i] * beta[i] - V[i] * ((Y[i] @ r) / c[i])
    return r


def _chol(a):
    try:
        L = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("matrix is not positive definite") from None
    if not np.all(np.diag(L) > 0.0):
        raise NotPositiveDefinite("zero pivot in Cholesky factor")
    return L


def gauss_kl(pnat, qnat):
    Lp = _chol(pnat)
    Lq = _chol(qnat)
    n = pnat.shape[0]
    # trace(qnat pnat^-1) = |Lp^-1 Lq|_F^2
    X = solve_triangular(Lp, Lq, lower=True, check_finite=False)
    val = 0.5 * (
        2.0 * np.sum(np.log(np.diag(Lp)))
        - 2.0 * np.sum(np.log(np.diag(Lq)))
        + float(np.sum(X * X))
        - n
    )
    return float(val)
