import numpy as np
import pytest

from projquasi import kernels


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=sorted(kernels.BACKENDS))
def backend(request, monkeypatch):
    """Run a test once per available kernel backend."""
    impl = kernels.BACKENDS[request.param]
    for name in ("oblique_rank_update", "two_loop", "gauss_kl"):
        monkeypatch.setattr(kernels, name, getattr(impl, name))
    return request.param


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """``criterion(n, ok, detail)`` records a pass/fail line, then asserts ``ok``."""

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
