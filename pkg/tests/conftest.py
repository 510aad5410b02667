from pathlib import Path

import numpy as np
import pytest

from presheaf_mp.presheaf import GraphicalSpec, graphical_presheaf

MODELS = Path(__file__).resolve().parent.parent / "models"

_ACCEPTANCE: list = []


@pytest.fixture
def models_dir():
    return MODELS


@pytest.fixture
def path2_spec():
    return GraphicalSpec([("x1", 2), ("x2", 2)], [["x1"], ["x2"], ["x1", "x2"]])


@pytest.fixture
def path3_spec():
    return GraphicalSpec([("x1", 2), ("x2", 2), ("x3", 2)],
                         [["x1"], ["x2"], ["x3"], ["x1", "x2"], ["x2", "x3"]])


@pytest.fixture
def path2(path2_spec):
    return graphical_presheaf(path2_spec)


@pytest.fixture
def path3(path3_spec):
    return graphical_presheaf(path3_spec)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance_line():
    """Record a criterion's PASS/FAIL line for the terminal summary."""
    def record(number, title, ok, detail=""):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
        _ACCEPTANCE.append((number, line))
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line)
