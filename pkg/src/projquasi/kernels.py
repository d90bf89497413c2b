"""Backend selection for the hot kernels.

The compiled extension is preferred; the numpy fallback is used when it is
missing or when ``PROJQUASI_PURE_PYTHON`` is set to a non-empty value other
than ``0``.
"""
import os

from . import _pykernels

BACKENDS = {"python": _pykernels}

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None
else:
    BACKENDS["cython"] = _ckernels


def _select():
    forced = os.environ.get("PROJQUASI_PURE_PYTHON", "")
    if forced not in ("", "0") or _ckernels is None:
        return "python"
    return "cython"


BACKEND = _select()
_impl = BACKENDS[BACKEND]

oblique_rank_update = _impl.oblique_rank_update
two_loop = _impl.two_loop
gauss_kl = _impl.gauss_kl
