import numpy as np
import pytest

from rplsh import Dataset, generate_synthetic

# the acceptance dataset
STANDARD = dict(n=20_000, d=128, clusters=16, spread=1.0, seed=1)


@pytest.fixture
def tiny():
    return Dataset(np.array([0, 1, 2]), np.array([[0.0, 0.0], [1.0, 0.0], [5.0, 5.0]]))


@pytest.fixture(scope="session")
def blobs():
    return generate_synthetic(n=600, d=12, clusters=6, spread=0.5, seed=3)


@pytest.fixture(scope="session")
def standard():
    return generate_synthetic(**STANDARD)


def write_text(path, text):
    path.write_bytes(text.encode("utf-8"))
    return path


ACCEPTANCE_LINES: list[str] = []


def report(number, ok, detail):
    """Record and print one acceptance line; returns ``ok`` for asserting."""
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
