import csv
import os

import numpy as np
import pytest

from projquasi import cli
from projquasi.cli import EXIT_USAGE, ExperimentSpec, compare, execute, history_csv, main


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_run_convex_exp_2d(tmp_path):
    out = tmp_path / "fig1.csv"
    code = main(["run", "--problem", "convex-exp-2d", "--x0", "5,-7", "--method", "ortho-proj",
                 "--max-iters", "50", "--out", str(out)])
    assert code == 0
    rows = read_csv(out)
    assert rows[0] == ["iter", "f", "grad_norm", "alpha", "err_to_xstar", "update_skipped"]
    body = rows[1:]
    assert len(body) <= 51
    errs = [float(r[4]) for r in body]
    assert errs[-1] < 1e-6 < errs[0]
    assert open(out, "rb").read().count(b"\r\n") == len(rows)


def test_run_rosenbrock_converges(tmp_path):
    code = main(["run", "--problem", "rosenbrock-10", "--x0", "preset:0.9", "--method", "bfgs",
                 "--max-iters", "100", "--out", str(tmp_path / "f3.csv")])
    assert code == 0


def test_run_from_origin_reports(tmp_path, capsys):
    code = main(["run", "--problem", "rosenbrock-10", "--x0", "preset:origin", "--method", "ortho-proj",
                 "--out", str(tmp_path / "f2.csv")])
    assert code in (0, 2, 3)
    err = capsys.readouterr().err
    assert "f = " in err and "x = [" in err


def test_exit_codes(tmp_path):
    base = ["run", "--problem", "rosenbrock-10", "--x0", "preset:origin", "--method", "bfgs", "--out", str(tmp_path / "x.csv")]
    assert main(base + ["--max-iters", "3"]) == 2
    assert main(["run", "--problem", "nope", "--method", "bfgs"]) == EXIT_USAGE
    assert main(["run", "--problem", "quadratic", "--method", "sr1"]) == EXIT_USAGE
    assert main(["run", "--problem", "convex-exp-2d", "--x0", "1,2,3", "--method", "bfgs"]) == EXIT_USAGE
    assert main(["run", "--problem", "convex-exp-2d", "--method", "block-orth"]) == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["run", "--problem", "quadratic"])
    assert exc.value.code == EXIT_USAGE


def test_line_search_failure_exit(monkeypatch, tmp_path):
    from projquasi.problems import Problem

    broken = Problem("broken", 1, lambda x: float(x[0] ** 2 + 1.0), lambda x: np.array([-1.0]))
    monkeypatch.setitem(cli.get_problem.__globals__["REGISTRY"], "broken", lambda **_: broken)
    assert main(["run", "--problem", "broken", "--x0", "0", "--method", "bfgs", "--out", str(tmp_path / "b.csv")]) == 3


def test_blank_error_without_minimizer(monkeypatch):
    from projquasi.problems import gen_rosenbrock

    p = gen_rosenbrock(3)
    nomin = type(p)(p.name, p.n, p.f, p.grad, p.hess_action)
    monkeypatch.setitem(cli.get_problem.__globals__["REGISTRY"], "rb3", lambda **_: nomin)
    problem, hist = execute(ExperimentSpec("rb3", "bfgs", x0="0,0,0"))
    rows = list(csv.reader(history_csv(problem, hist).splitlines()))
    assert all(r[4] == "" for r in rows[1:])


@pytest.mark.parametrize("method", ["oblique:s", "oblique:y", "block-orth", "block-oblique"])
def test_other_methods(method, tmp_path):
    problem = "sum-quadratic" if method.startswith("block") else "quadratic"
    code = main(["run", "--problem", problem, "--method", method, "--q", "2", "--batch", "8",
                 "--tol", "1e-7", "--out", str(tmp_path / "m.csv")])
    assert code == 0


def test_memory_flag(tmp_path):
    assert main(["run", "--problem", "rosenbrock-10", "--method", "ortho-proj", "--memory", "5",
                 "--max-iters", "400", "--out", str(tmp_path / "m.csv")]) == 0


def test_row_count_matches_records(tmp_path):
    spec = ExperimentSpec("rosenbrock-10", "bfgs", x0="preset:0.9")
    problem, hist = execute(spec)
    assert len(history_csv(problem, hist).splitlines()) == len(hist.records) + 1


def test_byte_identical_reruns(tmp_path):
    args = ["run", "--problem", "sum-quadratic", "--method", "block-oblique", "--q", "2",
            "--batch", "5", "--seed", "3"]
    main(args + ["--out", str(tmp_path / "a.csv")])
    main(args + ["--out", str(tmp_path / "b.csv")])
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_seed_env_default(monkeypatch):
    monkeypatch.setenv("PROJQUASI_SEED", "17")
    args = cli.build_parser().parse_args(["run", "--problem", "quadratic", "--method", "bfgs"])
    assert args.seed == 17


def test_compare_writes_csv_and_svg(tmp_path):
    specs = [ExperimentSpec("convex-exp-2d", m, x0="5,-7", max_iters=50) for m in ("bfgs", "ortho-proj")]
    compare(specs, str(tmp_path / "fig1"))
    rows = read_csv(tmp_path / "fig1.csv")
    assert rows[0][:3] == ["method", "iter", "f"]
    assert {r[0] for r in rows[1:]} == {"bfgs", "ortho-proj"}
    svg = (tmp_path / "fig1.svg").read_text()
    assert svg.startswith("<svg") and svg.count("<polyline") == 2
    assert not [f for f in os.listdir(tmp_path) if f.startswith(".tmp-")]


def test_compare_single_and_mismatched(tmp_path):
    compare([ExperimentSpec("convex-exp-2d", "bfgs")], str(tmp_path / "one"))
    assert (tmp_path / "one.svg").read_text().count("<polyline") == 1
    with pytest.raises(cli.UsageError):
        compare([ExperimentSpec("convex-exp-2d", "bfgs"), ExperimentSpec("quadratic", "bfgs")], str(tmp_path / "x"))


def test_compare_cli(tmp_path):
    code = main(["compare", "--problem", "rosenbrock-10", "--x0", "preset:0.9", "--methods", "bfgs,ortho-proj",
                 "--max-iters", "100", "--out", str(tmp_path / "fig3")])
    assert code == 0
    assert (tmp_path / "fig3.svg").exists()


def test_verify_cli(capsys):
    assert main(["verify", "stationarity", "--seed", "7"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out
    assert main(["verify", "nope"]) == EXIT_USAGE


def test_verify_corollary1_report(capsys):
    assert main(["verify", "corollary1"]) == 0
    assert "0 violations / 2000 trials" in capsys.readouterr().out


def test_module_entry_point():
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "projquasi", "verify", "nope"], capture_output=True, text=True)
    assert proc.returncode == EXIT_USAGE
