import numpy as np
import pytest

ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {num:2d}. {name}: {detail}")


@pytest.fixture
def criterion():
    """Record one acceptance line; the test still asserts on its own."""
    def record(num, name, ok, detail=""):
        ACCEPTANCE.append((num, name, bool(ok), detail))
        print(f"[{'PASS' if ok else 'FAIL'}] {num:2d}. {name}: {detail}")
        return ok
    return record


@pytest.fixture
def rng():
    return np.random.default_rng(20121)
