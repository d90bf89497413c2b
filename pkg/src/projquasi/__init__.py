"""Projection-based BFGS-like quasi-Newton updates.

The inverse-Hessian approximation is updated as ``(I - P)' H (I - P) + s s'/y's``
for a projector ``P`` onto span(y): ``P = y s'/y's`` is BFGS, the orthogonal
projector ``y y'/y'y`` gives the projection variant, and any ``v`` with
``v'y != 0`` gives ``P = y v'/y'v``. Block versions replace ``(s, y)`` by a
sketch ``S`` and a sub-sampled Hessian action ``Y``.
"""
from .divergence import gauss_kl, logdet_dirderiv
from .driver import (
    BFGS,
    ORTHO_PROJ,
    IterationRecord,
    OptimizerConfig,
    RunHistory,
    Termination,
    UpdateStrategy,
    lm_apply,
    minimize,
    minimize_block,
    parse_method,
)
from .errors import *  # noqa: F401,F403
from .kernels import BACKEND
from .linesearch import LineSearchParams, backtracking_armijo, strong_wolfe
from .numcore import logdet, min_eigenvalue, spd_factorize, spd_solve
from .problems import (
    Problem,
    SumProblem,
    convex_exp_2d,
    gen_rosenbrock,
    get_problem,
    random_quadratic,
    random_sum_quadratic,
    subsampled_hess_action,
)
from .updates import (
    BlockSecantPair,
    SecantPair,
    bfgs_update,
    block_oblique_update,
    block_orth_update,
    curvature_ok,
    oblique_update,
    proj_update,
)

__version__ = "0.1.0"
