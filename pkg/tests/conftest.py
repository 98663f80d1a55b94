import json
from collections import Counter

import pytest
from hypothesis import HealthCheck, settings

from fiberforge.pipeline import data_path

settings.register_profile("ci", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")

# every property suite runs at least this many generated cases
PROPERTY_CASES = 1000

# generated cases seen per property suite, bumped from inside the test bodies
CASES = Counter()

# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE: dict[int, str] = {}


def report(criterion: int, ok: bool, detail: str) -> None:
    line = f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[criterion] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])


@pytest.fixture
def bundled():
    def load(name):
        return json.loads(data_path(name).read_text())
    return load
