import numpy as np
import pytest

from curveflow.geometry import ClosedCurve

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def figure_eight() -> ClosedCurve:
    t = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    return ClosedCurve(np.column_stack((np.sin(t), np.sin(t) * np.cos(t))), orient=False)
