import os
import shutil
import sys
from pathlib import Path

import pytest

sys.path.insert(0, os.path.dirname(__file__))

BENCH = Path(__file__).resolve().parent.parent / "benchmarks"


def bench(name: str) -> str:
    return str(BENCH / f"{name}.ags")


requires_z3 = pytest.mark.skipif(shutil.which("z3") is None, reason="z3 executable not on PATH")


@pytest.fixture(scope="session")
def peterson():
    from agsynth.dsl import load_problem

    return load_problem(bench("peterson"))


@pytest.fixture(scope="session")
def peterson_tables():
    from agsynth.problem import StrategyTables

    # rows are (turn, flag) MSB first: w11 = turn & flag2, w21 = !turn & flag1
    return StrategyTables.of({"w11": [0, 0, 0, 1], "w12": [0], "w21": [0, 1, 0, 0], "w22": [0]})


# criterion number -> (passed, detail); printed after the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
