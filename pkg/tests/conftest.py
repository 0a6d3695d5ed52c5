import numpy as np
import pytest

_ACCEPTANCE = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def criterion():
    """Record one acceptance criterion: prints a PASS/FAIL line and asserts."""

    def record(number: int, title: str, ok: bool, elapsed: float, limit: float, detail: str = ""):
        in_time = elapsed < limit
        passed = bool(ok) and in_time
        line = (f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}  "
                f"[{elapsed:.2f}s / {limit:g}s]  {detail}").rstrip()
        _ACCEPTANCE[number] = line
        print(line)
        assert ok, f"criterion {number} ({title}) failed: {detail}"
        assert in_time, f"criterion {number} ({title}) took {elapsed:.2f}s, limit {limit}s"

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for number in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[number])
