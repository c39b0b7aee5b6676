import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


class Criterion:
    def __init__(self, number: int, title: str):
        self.number = number
        self.title = title
        self.reported = False

    def report(self, passed: bool, detail: str = "") -> bool:
        line = f"criterion {self.number} {'PASS' if passed else 'FAIL'}: {self.title}"
        if detail:
            line += f" [{detail}]"
        print(line)
        ACCEPTANCE_LINES.append(line)
        self.reported = True
        return passed


@pytest.fixture
def criterion():
    made = []

    def make(number: int, title: str) -> Criterion:
        c = Criterion(number, title)
        made.append(c)
        return c

    yield make
    for c in made:
        if not c.reported:
            c.report(False, "raised before evaluation finished")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
