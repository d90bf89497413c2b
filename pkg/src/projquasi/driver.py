"""Quasi-Newton driver: line-search iteration with pluggable inverse-Hessian
updates, an optional limited-memory mode, and a sub-sampled block mode."""
import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from . import kernels
from .errors import (
    BlockCurvatureViolation,
    DegenerateDirection,
    DimensionMismatch,
    EmptyBatch,
    MaxEvalsExceeded,
    NotDescentDirection,
    RankDeficientSketch,
    SecantCheckFailed,
)
from .linesearch import LineSearchParams, backtracking_armijo, exact_quadratic, strong_wolfe
from .numcore import as_vector
from .problems import SumProblem, subsampled_hess_action
from .updates import (
    EPS_RANK,
    BlockSecantPair,
    SecantPair,
    block_oblique_update,
    block_orth_update,
    block_secant_residual,
    curvature_ok,
    oblique_update,
    secant_residual,
)

SECANT_TOL = 1e-10

VECTOR_KINDS = ("bfgs", "ortho-proj", "oblique")
BLOCK_KINDS = ("block-orth", "block-oblique")
SKETCHES = ("steps", "gaussian", "coordinate")


@dataclass(frozen=True)
class UpdateStrategy:
    """Which update rule the driver applies.

    ``v`` selects the oblique direction: ``"s"``, ``"y"``, or a callable
    ``v(s, y) -> array``. ``q``, ``batch_size`` and ``sketch`` only matter for
    the block kinds; ``batch_size=None`` means the full sum.
    """

    kind: str = "bfgs"
    v: Union[str, Callable, None] = None
    q: int = 1
    batch_size: Optional[int] = None
    sketch: str = "steps"

    def __post_init__(self):
        if self.kind not in VECTOR_KINDS + BLOCK_KINDS:
            raise ValueError(f"unknown update kind {self.kind!r}")
        if self.kind == "oblique":
            if self.v is None:
                raise ValueError("oblique strategy needs a direction v")
            if isinstance(self.v, str) and self.v not in ("s", "y"):
                raise ValueError(f"oblique direction must be 's', 'y' or callable, got {self.v!r}")
        if self.q < 1:
            raise ValueError("q must be >= 1")
        if self.batch_size is not None and self.batch_size < 1:
            raise EmptyBatch("batch_size must be >= 1")
        if self.sketch not in SKETCHES:
            raise ValueError(f"unknown sketch policy {self.sketch!r}")

    @property
    def is_block(self):
        return self.kind in BLOCK_KINDS

    def direction(self, s, y):
        """The oblique direction ``v`` this strategy uses for the pair (s, y)."""
        if self.kind == "bfgs":
            return s
        if self.kind == "ortho-proj":
            return y
        if self.kind == "oblique":
            if self.v == "s":
                return s
            if self.v == "y":
                return y
            return as_vector(self.v(s, y))
        raise ValueError(f"{self.kind} has no vector direction")


BFGS = UpdateStrategy("bfgs")
ORTHO_PROJ = UpdateStrategy("ortho-proj")


def parse_method(name, q=1, batch_size=None, sketch="steps"):
    """Map a CLI method name to an UpdateStrategy."""
    if name in ("bfgs", "ortho-proj"):
        return UpdateStrategy(name)
    if name.startswith("oblique:"):
        return UpdateStrategy("oblique", v=name.split(":", 1)[1])
    if name in BLOCK_KINDS:
        return UpdateStrategy(name, q=q, batch_size=batch_size, sketch=sketch)
    raise KeyError(
        f"unknown method {name!r}; known methods: bfgs, ortho-proj, oblique:s, oblique:y, "
        "block-orth, block-oblique"
    )


@dataclass(frozen=True)
class OptimizerConfig:
    max_iters: int = 100
    grad_tol: float = 1e-8
    strategy: UpdateStrategy = BFGS
    line_search: str = "strong-wolfe"
    ls_params: LineSearchParams = field(default_factory=LineSearchParams)
    memory: Optional[int] = None
    lm_gamma_scaling: bool = True
    seed: int = 0
    check_secant: bool = True

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")
        if self.memory is not None and self.memory < 1:
            raise ValueError("memory must be >= 1")
        if self.line_search not in ("strong-wolfe", "armijo", "exact"):
            raise ValueError(f"unknown line search {self.line_search!r}")


class Termination(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERS = "MaxIters"
    LINE_SEARCH_FAILURE = "LineSearchFailure"


@dataclass(frozen=True)
class IterationRecord:
    """State after ``k`` steps. ``alpha`` is the step that produced ``x`` (0 for k=0)."""

    k: int
    x: np.ndarray
    f: float
    grad_norm: float
    alpha: float
    update_skipped: bool


@dataclass
class RunHistory:
    records: list
    termination: Termination
    final_H: np.ndarray
    pairs: list = field(default_factory=list)
    max_secant_residual: float = 0.0

    @property
    def x(self):
        return self.records[-1].x

    @property
    def f(self):
        return self.records[-1].f

    @property
    def iterations(self):
        return self.records[-1].k


def lm_apply(pairs, strategy, g, gamma=None):
    """Return ``H_k g`` with ``H_k`` rebuilt from the stored pairs.

    The strategy's update is applied to ``gamma * I`` once per pair, oldest
    first, but matrix-free (two recursion sweeps, O(m n)). ``gamma=None``
    uses ``s'y / y'y`` of the newest pair, or 1 with no pairs.
    """
    g = np.ascontiguousarray(g, dtype=float)
    if not pairs:
        return (1.0 if gamma is None else gamma) * g
    if gamma is None:
        last = pairs[-1]
        gamma = last.rho / float(last.y @ last.y)
    S = np.ascontiguousarray([p.s for p in pairs])
    Y = np.ascontiguousarray([p.y for p in pairs])
    V = np.ascontiguousarray([strategy.direction(p.s, p.y) for p in pairs])
    return kernels.two_loop(S, Y, V, g, float(gamma))


def _dense_from_pairs(pairs, strategy, n, gamma):
    return np.column_stack([lm_apply(pairs, strategy, e, gamma) for e in np.eye(n)])


def _line_search(p, cfg, x, d):
    if cfg.line_search == "strong-wolfe":
        return strong_wolfe(p.f, p.grad, x, d, cfg.ls_params)
    if cfg.line_search == "armijo":
        return backtracking_armijo(p.f, p.grad, x, d, cfg.ls_params)
    if p.hess_action is None:
        raise ValueError("exact line search needs a Hessian action")
    return exact_quadratic(p.hess_action, p.grad, x, d)


def _start(p, x0):
    x = as_vector(x0)
    if x.size != p.n:
        raise DimensionMismatch(f"x0 has {x.size} entries, problem {p.name} has n={p.n}")
    f = float(p.f(x))
    g = np.asarray(p.grad(x), dtype=float)
    rec = IterationRecord(0, x.copy(), f, float(np.linalg.norm(g)), 0.0, False)
    return x, f, g, [rec]


def _iterate(p, x0, cfg, update_H):
    """Shared loop. ``update_H(H, x, s, y) -> (H or None, residual)``;
    returning None means the update was skipped."""
    x, f, g, records = _start(p, x0)
    H = np.eye(p.n)
    worst = 0.0
    k = 0
    while True:
        if records[-1].grad_norm < cfg.grad_tol:
            term = Termination.CONVERGED
            break
        if k >= cfg.max_iters:
            term = Termination.MAX_ITERS
            break
        d = -(H @ g)
        try:
            res = _line_search(p, cfg, x, d)
        except (NotDescentDirection, MaxEvalsExceeded):
            term = Termination.LINE_SEARCH_FAILURE
            break
        s = res.alpha * d
        x_new = x + s
        f_new = float(p.f(x_new))
        g_new = np.asarray(p.grad(x_new), dtype=float)
        H_new, resid = update_H(H, x, s, g_new - g)
        skipped = H_new is None
        if not skipped:
            H = H_new
            worst = max(worst, resid)
        x, f, g = x_new, f_new, g_new
        k += 1
        records.append(IterationRecord(k, x.copy(), f, float(np.linalg.norm(g)), res.alpha, skipped))
    return records, term, H, worst


def _checked(cfg, resid):
    if cfg.check_secant and not resid <= SECANT_TOL:
        raise SecantCheckFailed(f"secant residual {resid:.3e} exceeds {SECANT_TOL:.0e}")
    return resid


def minimize(p, x0, cfg=None):
    """Minimize ``p.f`` from ``x0`` with a vector (non-block) strategy.

    Starts from ``H = I``; each step is ``-H grad`` scaled by the line
    search, then ``H`` is updated from ``s = x+ - x`` and
    ``y = grad(x+) - grad(x)`` unless the curvature test fails, in which
    case the update is skipped. With ``cfg.memory`` set, the last
    ``memory`` pairs are kept instead of a dense ``H``.
    """
    cfg = cfg or OptimizerConfig()
    strategy = cfg.strategy
    if strategy.is_block:
        raise ValueError("block strategies run through minimize_block")
    if cfg.memory is not None:
        return _minimize_lm(p, x0, cfg)
    pairs = []

    def update_H(H, x, s, y):
        pair = SecantPair(s, y)
        if not curvature_ok(pair):
            return None, 0.0
        try:
            v = strategy.direction(pair.s, pair.y)
            H_new = oblique_update(H, pair, v)
        except DegenerateDirection:
            return None, 0.0
        pairs.append(pair)
        return H_new, _checked(cfg, secant_residual(H_new, pair))

    records, term, H, worst = _iterate(p, x0, cfg, update_H)
    return RunHistory(records, term, H, pairs, worst)


def _minimize_lm(p, x0, cfg):
    strategy = cfg.strategy
    pairs = deque(maxlen=cfg.memory)
    x, f, g, records = _start(p, x0)
    k = 0
    while True:
        if records[-1].grad_norm < cfg.grad_tol:
            term = Termination.CONVERGED
            break
        if k >= cfg.max_iters:
            term = Termination.MAX_ITERS
            break
        gamma = None if cfg.lm_gamma_scaling else 1.0
        d = -lm_apply(list(pairs), strategy, g, gamma)
        try:
            res = _line_search(p, cfg, x, d)
        except (NotDescentDirection, MaxEvalsExceeded):
            term = Termination.LINE_SEARCH_FAILURE
            break
        s = res.alpha * d
        x_new = x + s
        g_new = np.asarray(p.grad(x_new), dtype=float)
        pair = SecantPair(s, g_new - g)
        skipped = not curvature_ok(pair)
        if not skipped:
            v = strategy.direction(pair.s, pair.y)
            if abs(v @ pair.y) <= 1e-12 * np.linalg.norm(v) * np.linalg.norm(pair.y):
                skipped = True
            else:
                pairs.append(pair)
        x, g = x_new, g_new
        k += 1
        records.append(
            IterationRecord(k, x.copy(), float(p.f(x)), float(np.linalg.norm(g)), res.alpha, skipped)
        )
    gamma = None if cfg.lm_gamma_scaling else 1.0
    H = _dense_from_pairs(list(pairs), strategy, p.n, gamma)
    return RunHistory(records, term, 0.5 * (H + H.T), list(pairs), 0.0)


def _sketch(policy, steps, n, q, rng):
    if policy == "steps":
        cols = list(steps)[::-1][:q]
        Q, R = np.linalg.qr(np.column_stack(cols))
        d = np.abs(np.diag(R))
        if d.min() <= EPS_RANK * d.max():
            raise RankDeficientSketch("stored steps are linearly dependent")
        return Q
    if policy == "gaussian":
        return rng.standard_normal((n, q))
    return np.eye(n)[:, np.sort(rng.choice(n, size=q, replace=False))]


def minimize_block(p, x0, cfg):
    """Block mode: full-gradient steps, block updates from sub-sampled Hessian actions.

    Each iteration draws a batch of components, forms the sketch ``S`` by
    ``cfg.strategy.sketch`` and ``Y = (1/|T|) sum_T H_i(x) S`` at the point the
    step started from. Updates whose ``S'Y`` is not SPD or whose sketch is
    rank deficient are skipped.
    """
    strategy = cfg.strategy
    if not strategy.is_block:
        raise ValueError("minimize_block needs a block strategy")
    if not isinstance(p, SumProblem):
        raise TypeError("block strategies need a SumProblem")
    if strategy.q > p.n:
        raise ValueError(f"q={strategy.q} exceeds n={p.n}")
    if strategy.batch_size is not None and strategy.batch_size > p.N:
        raise ValueError(f"batch_size={strategy.batch_size} exceeds N={p.N}")
    rng = np.random.default_rng(cfg.seed)
    steps = deque(maxlen=strategy.q)
    rule = block_orth_update if strategy.kind == "block-orth" else block_oblique_update

    def update_H(H, x, s, y):
        steps.append(s)
        if strategy.batch_size is None or strategy.batch_size == p.N:
            batch = range(p.N)
        else:
            batch = np.sort(rng.choice(p.N, size=strategy.batch_size, replace=False))
        try:
            S = _sketch(strategy.sketch, steps, p.n, strategy.q, rng)
            blk = BlockSecantPair(S, subsampled_hess_action(p, x, S, batch))
            H_new = rule(H, blk)
        except (RankDeficientSketch, BlockCurvatureViolation):
            return None, 0.0
        return H_new, _checked(cfg, block_secant_residual(H_new, blk))

    records, term, H, worst = _iterate(p, x0, cfg, update_H)
    return RunHistory(records, term, H, [], worst)
