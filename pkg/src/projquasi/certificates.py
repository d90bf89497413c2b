"""Seeded certificate sweeps behind ``projquasi verify``."""
from dataclasses import dataclass, field

import numpy as np

from .updates import (
    BlockSecantPair,
    SecantPair,
    bfgs_update,
    block_oblique_update,
    block_orth_update,
    oblique_update,
    proj_update,
)
from .varoracle import (
    RegularizedPrior,
    check_stationarity,
    random_block_instance,
    random_instance,
    regularized_argmin,
    trace_term_spread,
    verify_block_kl_minimality,
    verify_kl_minimality,
)

EPSILONS = (1e-1, 1e-2, 1e-3)


@dataclass
class Certificate:
    name: str
    passed: bool = True
    lines: list = field(default_factory=list)

    def check(self, cond, text):
        self.passed &= bool(cond)
        self.lines.append(f"[{'PASS' if cond else 'FAIL'}] {text}")


def bfgs_reference(H, pair):
    """Inverse BFGS formed with explicit dense products (no shared kernel)."""
    n = pair.n
    rho = float(pair.y @ pair.s)
    L = np.eye(n) - np.outer(pair.s, pair.y) / rho
    return L @ H @ L.T + np.outer(pair.s, pair.s) / rho


def max_rel_entry_diff(a, b):
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


def corollary1(seed=0, instances=10, directions=200, equal_instances=100):
    cert = Certificate("corollary1")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(equal_instances):
        Hk, pair = random_instance(int(rng.integers(2, 21)), rng)
        worst = max(worst, max_rel_entry_diff(oblique_update(Hk, pair, pair.s), bfgs_reference(Hk, pair)))
    cert.check(worst <= 1e-13, f"oblique(v=s) vs dense BFGS: max rel entry diff {worst:.2e} over {equal_instances} instances (tol 1e-13)")

    trials = violations = 0
    controls = []
    for i in range(instances):
        Hk, pair = random_instance(2 + i % 5, rng)
        rep = verify_kl_minimality(bfgs_update(Hk, pair), Hk, pair, directions, seed + 1000 + i)
        trials += rep.trials
        violations += rep.violations
        neg = verify_kl_minimality(proj_update(Hk, pair), Hk, pair, directions, seed + 2000 + i)
        controls.append(neg.violations)
    cert.check(violations == 0, f"BFGS KL minimality: {violations} violations / {trials} trials")
    cert.check(min(controls) >= 1, f"negative control (proj update): min {min(controls)} violations per instance")
    return cert


def corollary2(seed=0, instances=10, directions=100, n=5, q=2):
    cert = Certificate("corollary2")
    rng = np.random.default_rng(seed)
    trials = violations = 0
    controls = []
    for i in range(instances):
        Hk, blk = random_block_instance(n, q, rng)
        rep = verify_block_kl_minimality(block_oblique_update(Hk, blk), Hk, blk, directions, seed + 1000 + i)
        trials += rep.trials
        violations += rep.violations
        neg = verify_block_kl_minimality(block_orth_update(Hk, blk), Hk, blk, directions, seed + 2000 + i)
        controls.append(neg.violations)
    cert.check(violations == 0, f"block-oblique KL minimality: {violations} violations / {trials} trials")
    cert.check(min(controls) >= 1, f"negative control (block-orth): min {min(controls)} violations per instance")

    worst = 0.0
    for _ in range(100):
        Hk, pair = random_instance(int(rng.integers(2, 11)), rng)
        blk = BlockSecantPair(pair.s[:, None], pair.y[:, None])
        worst = max(
            worst,
            max_rel_entry_diff(block_orth_update(Hk, blk), proj_update(Hk, pair)),
            max_rel_entry_diff(block_oblique_update(Hk, blk), bfgs_update(Hk, pair)),
        )
    cert.check(worst <= 1e-12, f"q=1 block vs vector updates: max rel entry diff {worst:.2e} (tol 1e-12)")
    return cert


def theorem1(seed=0, instances=10, n=3):
    cert = Certificate("theorem1")
    rng = np.random.default_rng(seed)
    monotone = True
    last = []
    for i in range(instances):
        Hk, pair = random_instance(n, rng)
        Hp = proj_update(Hk, pair)
        dists = [
            float(np.linalg.norm(regularized_argmin(RegularizedPrior(eps, Hk, pair.y), pair, seed=seed + i) - Hp))
            for eps in EPSILONS
        ]
        monotone &= dists[0] > dists[1] > dists[2]
        last.append(dists[-1])
        cert.lines.append("       instance %d: " % i + ", ".join(
            f"eps={e:.0e}: {d:.3e}" for e, d in zip(EPSILONS, dists)))
    cert.check(monotone, "distance to the projection update strictly decreasing in eps on every instance")
    cert.check(max(last) < 1e-2, f"max distance at eps=1e-3: {max(last):.3e} (tol 1e-2)")

    spread = max(trace_term_spread(*random_instance(n + 1, rng), 0.0, seed=seed) for _ in range(instances))
    cert.check(spread < 1e-8, f"trace-term spread at eps=0: {spread:.2e} (tol 1e-8)")
    return cert


def stationarity(seed=0, instances=100, n=5):
    cert = Certificate("stationarity")
    rng = np.random.default_rng(seed)
    worst = worst_lam = 0.0
    for _ in range(instances):
        Hk, pair = random_instance(n, rng)
        res = check_stationarity(proj_update(Hk, pair), Hk, pair)
        worst = max(worst, res.residual)
        worst_lam = max(worst_lam, abs(res.two_lambda_y - 1.0))
    cert.check(worst < 1e-11, f"stationarity residual: max {worst:.2e} over {instances} instances (tol 1e-11)")
    cert.check(worst_lam <= 8 * np.finfo(float).eps, f"|2 lambda'y - 1|: max {worst_lam:.2e}")
    return cert


SUITES = {
    "corollary1": corollary1,
    "corollary2": corollary2,
    "theorem1": theorem1,
    "stationarity": stationarity,
}


def run_suite(name, seed=0):
    """Run one suite (or ``"all"``); returns a list of certificates."""
    if name == "all":
        return [fn(seed) for fn in SUITES.values()]
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; known suites: all, {', '.join(SUITES)}")
    return [SUITES[name](seed)]
