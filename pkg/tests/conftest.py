from __future__ import annotations

import functools

import pytest

from gasflex.runs import solve_system
from gasflex.solver import find_cbc
from gasflex.toys import shipped_path, shipped_system


@functools.lru_cache(maxsize=None)
def solved(name: str, mode: str):
    system = shipped_system(name)
    return system, solve_system(system, mode)


@pytest.fixture(scope="session")
def minimal():
    return shipped_system("toy_minimal")


@pytest.fixture(scope="session")
def reversal():
    return shipped_system("toy_reversal")


@pytest.fixture(scope="session")
def counterexample():
    return shipped_system("toy_counterexample")


@pytest.fixture
def data_path():
    return lambda name: str(shipped_path(name))


requires_cbc = pytest.mark.skipif(find_cbc() is None, reason="no CBC executable available")


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
