import sys
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def criterion():
    """Time a block, enforce its budget and record one PASS/FAIL line."""

    @contextmanager
    def run(number, title, budget=None):
        t0 = time.perf_counter()
        try:
            yield
        except BaseException as exc:
            line = f"[FAIL] criterion {number}: {title} ({type(exc).__name__}: {str(exc)[:160]})"
            _CRITERIA.append((number, line))
            print(line)
            raise
        elapsed = time.perf_counter() - t0
        ok = budget is None or elapsed < budget
        timing = f"{elapsed:.2f}s" + (f" < {budget}s" if ok and budget else f" over {budget}s" if budget else "")
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({timing})"
        _CRITERIA.append((number, line))
        print(line)
        assert ok, f"criterion {number} took {elapsed:.2f}s, budget {budget}s"

    return run


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for _, line in sorted(_CRITERIA):
        terminalreporter.write_line(line)
