"""Relative entropy between zero-mean Gaussians in natural parameters."""
import numpy as np

from . import kernels
from .errors import DimensionMismatch, SingularMatrix

KL_CLAMP = 1e-10


def gauss_kl(pnat, qnat):
    """KL divergence D(p || q) of N(0, pnat^-1) from N(0, qnat^-1).

    Both arguments are inverse covariances (natural parameters)::

        D = 1/2 [logdet(pnat) - logdet(qnat) + trace(qnat pnat^-1) - n]

    Raises NotPositiveDefinite if either argument fails Cholesky. Values in
    ``[-1e-10, 0)`` are roundoff and clamped to 0.
    """
    pnat = np.ascontiguousarray(pnat, dtype=float)
    qnat = np.ascontiguousarray(qnat, dtype=float)
    if pnat.ndim != 2 or pnat.shape != qnat.shape or pnat.shape[0] != pnat.shape[1]:
        raise DimensionMismatch(f"incompatible shapes {pnat.shape} and {qnat.shape}")
    val = kernels.gauss_kl(pnat, qnat)
    if -KL_CLAMP <= val < 0.0:
        return 0.0
    return val


def logdet_dirderiv(M, dM):
    """Directional derivative of ``log|det M|`` along ``dM``: ``trace(M^-1 dM)``."""
    M = np.asarray(M, dtype=float)
    dM = np.asarray(dM, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or dM.shape != M.shape:
        raise DimensionMismatch(f"incompatible shapes {M.shape} and {dM.shape}")
    try:
        X = np.linalg.solve(M, dM)
    except np.linalg.LinAlgError:
        raise SingularMatrix("M is singular") from None
    if not np.all(np.isfinite(X)):
        raise SingularMatrix("M is numerically singular")
    return float(np.trace(X))
