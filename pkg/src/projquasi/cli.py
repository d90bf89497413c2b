"""Command-line front end: ``run``, ``compare`` and ``verify``.

Exit codes: 0 converged / certificates passed, 1 certificate failure,
2 max iterations, 3 line-search failure, 64 usage error.
"""
import argparse
import csv
import io
import os
import sys
import tempfile
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import certificates
from .driver import OptimizerConfig, Termination, minimize, minimize_block, parse_method
from .problems import DEFAULT_X0, get_problem

EXIT_USAGE = 64
EXIT_CODES = {
    Termination.CONVERGED: 0,
    Termination.MAX_ITERS: 2,
    Termination.LINE_SEARCH_FAILURE: 3,
}
HEADER = ["iter", "f", "grad_norm", "alpha", "err_to_xstar", "update_skipped"]


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    problem: str
    method: str
    x0: Optional[str] = None
    max_iters: int = 100
    grad_tol: float = 1e-8
    seed: int = 0
    q: int = 1
    batch: Optional[int] = None
    memory: Optional[int] = None
    dim: Optional[int] = None
    components: Optional[int] = None
    line_search: str = "strong-wolfe"


def parse_x0(text, n):
    """``"5,-7"``, ``"preset:origin"`` or ``"preset:<value>"`` (constant vector)."""
    if text.startswith("preset:"):
        name = text.split(":", 1)[1]
        if name == "origin":
            return np.zeros(n)
        try:
            return np.full(n, float(name))
        except ValueError:
            raise UsageError(f"unknown x0 preset {name!r}; use 'origin' or a number") from None
    try:
        x = np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise UsageError(f"cannot parse x0 {text!r}") from None
    if x.size != n:
        raise UsageError(f"x0 has {x.size} entries, problem needs {n}")
    return x


def execute(spec):
    """Run one experiment; returns ``(problem, RunHistory)``."""
    kwargs = {"seed": spec.seed}
    if spec.dim is not None:
        kwargs["n"] = spec.dim
    if spec.components is not None:
        kwargs["N"] = spec.components
    try:
        problem = get_problem(spec.problem, **kwargs)
        strategy = parse_method(spec.method, q=spec.q, batch_size=spec.batch)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if spec.x0 is None:
        x0 = np.array(DEFAULT_X0.get(spec.problem, np.zeros(problem.n)), dtype=float)
    else:
        x0 = parse_x0(spec.x0, problem.n)
    try:
        cfg = OptimizerConfig(
            max_iters=spec.max_iters, grad_tol=spec.grad_tol, strategy=strategy,
            memory=spec.memory, seed=spec.seed, line_search=spec.line_search,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if strategy.is_block:
        if spec.memory is not None:
            raise UsageError("--memory is not available for block methods")
        if not hasattr(problem, "components") or not problem.components:
            raise UsageError(f"block methods need a sum-structured problem, not {spec.problem}")
        try:
            return problem, minimize_block(problem, x0, cfg)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return problem, minimize(problem, x0, cfg)


def _num(v):
    return repr(float(v))


def history_rows(problem, history):
    xstar = problem.known_minimizer
    for r in history.records:
        err = "" if xstar is None else _num(np.linalg.norm(r.x - xstar))
        yield [str(r.k), _num(r.f), _num(r.grad_norm), _num(r.alpha), err, "1" if r.update_skipped else "0"]


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def write_atomic(path, text):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def history_csv(problem, history):
    return _csv_text(HEADER, history_rows(problem, history))


def _summary(spec, problem, history):
    x = ", ".join(f"{v:.6g}" for v in history.x)
    return (
        f"{spec.problem} / {spec.method}: {history.termination.value} after "
        f"{history.iterations} iterations, f = {history.f:.6e}, "
        f"|grad| = {history.records[-1].grad_norm:.3e}, x = [{x}]"
    )


def cmd_run(args):
    spec = _spec_from_args(args, args.method)
    problem, history = execute(spec)
    text = history_csv(problem, history)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        write_atomic(args.out, text)
    print(_summary(spec, problem, history), file=sys.stderr)
    return EXIT_CODES[history.termination]


def compare(specs, out):
    """Run ``specs`` on a shared problem; write ``<out>.csv`` and ``<out>.svg``.

    Returns the histories in order.
    """
    if len({s.problem for s in specs}) != 1:
        raise UsageError("compare needs all specs to share one problem")
    header = ["method"] + HEADER
    rows, series, runs = [], {}, []
    for spec in specs:
        problem, history = execute(spec)
        runs.append(history)
        pts = []
        for row in history_rows(problem, history):
            rows.append([spec.method] + row)
            if row[4]:
                pts.append((int(row[0]), float(row[4])))
        series[spec.method] = pts
    base = out[:-4] if out.endswith(".csv") else out
    write_atomic(base + ".csv", _csv_text(header, rows))
    from .plotting import log_line_plot

    svg = log_line_plot(series, title=f"{specs[0].problem}: |x_n - x*|", ylabel="|x_n - x*|_2")
    write_atomic(base + ".svg", svg)
    return runs


def cmd_compare(args):
    methods = [m for m in args.methods.split(",") if m]
    if not methods:
        raise UsageError("--methods needs at least one method")
    specs = [_spec_from_args(args, m) for m in methods]
    runs = compare(specs, args.out)
    for spec, history in zip(specs, runs):
        print(f"{spec.method}: {history.termination.value} after {history.iterations} iterations, f = {history.f:.6e}", file=sys.stderr)
    return 0 if all(h.termination is Termination.CONVERGED for h in runs) else 2


def cmd_verify(args):
    try:
        certs = certificates.run_suite(args.suite, args.seed)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    for cert in certs:
        print(f"== {cert.name}: {'PASS' if cert.passed else 'FAIL'}")
        for line in cert.lines:
            print("  " + line)
    return 0 if all(c.passed for c in certs) else 1


def _spec_from_args(args, method):
    return ExperimentSpec(
        problem=args.problem, method=method, x0=args.x0, max_iters=args.max_iters,
        grad_tol=args.tol, seed=args.seed, q=args.q, batch=args.batch, memory=args.memory,
        dim=args.dim, components=args.components, line_search=args.line_search,
    )


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _default_seed():
    raw = os.environ.get("PROJQUASI_SEED")
    try:
        return int(raw) if raw else 0
    except ValueError:
        return 0


def build_parser():
    parser = _Parser(prog="projquasi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def experiment_flags(p):
        p.add_argument("--problem", required=True, help="convex-exp-2d, rosenbrock-10, quadratic, sum-quadratic")
        p.add_argument("--x0", help="comma-separated vector, preset:origin or preset:<value>")
        p.add_argument("--q", type=int, default=1, help="sketch columns (block methods)")
        p.add_argument("--batch", type=int, help="mini-batch size (block methods; default: all)")
        p.add_argument("--memory", type=int, help="limited-memory pair count")
        p.add_argument("--max-iters", type=int, default=100)
        p.add_argument("--tol", type=float, default=1e-8, help="gradient-norm tolerance")
        p.add_argument("--seed", type=int, default=_default_seed())
        p.add_argument("--dim", type=int, help="dimension for quadratic problems")
        p.add_argument("--components", type=int, help="N for sum-quadratic")
        p.add_argument("--line-search", choices=["strong-wolfe", "armijo", "exact"], default="strong-wolfe")

    run = sub.add_parser("run", help="run one experiment, write its history CSV")
    experiment_flags(run)
    run.add_argument("--method", required=True, help="bfgs | ortho-proj | oblique:<s|y> | block-orth | block-oblique")
    run.add_argument("--out", help="CSV path (default: stdout)")
    run.set_defaults(func=cmd_run)

    cmp_ = sub.add_parser("compare", help="run several methods, write merged CSV and SVG plot")
    experiment_flags(cmp_)
    cmp_.add_argument("--methods", required=True, help="comma-separated method names")
    cmp_.add_argument("--out", required=True, help="output prefix; writes <out>.csv and <out>.svg")
    cmp_.set_defaults(func=cmd_compare)

    ver = sub.add_parser("verify", help="run variational certificate sweeps")
    ver.add_argument("suite", help="corollary1 | corollary2 | theorem1 | stationarity | all")
    ver.add_argument("--seed", type=int, default=_default_seed())
    ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"projquasi: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
