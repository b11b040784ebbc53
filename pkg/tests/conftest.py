import math
import re

import pytest

from gapwell import geometry as geo

PI = math.pi

# one (criterion, passed, line) entry per acceptance check, printed in the summary
ACCEPTANCE_LINES = []


@pytest.fixture
def single_window():
    return lambda a, d=PI: geo.StripGeometry(d, d, [geo.Window(0.0, a)])


@pytest.fixture
def criterion():
    """Record and print the verdict of one acceptance criterion."""
    def record(number, title, passed, detail):
        line = f"criterion {str(number):>3} {'PASS' if passed else 'FAIL'}: {title}; {detail}"
        ACCEPTANCE_LINES.append((number, passed, line))
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    def key(entry):
        num, rest = re.match(r"(\d+)(.*)", str(entry[0])).groups()
        return int(num), rest
    for _, _, line in sorted(ACCEPTANCE_LINES, key=key):
        terminalreporter.write_line(line)
