import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("ci", max_examples=25, deadline=None)
settings.load_profile("ci")

_LINES = {}


@pytest.fixture
def record():
    """Log one acceptance line; the terminal summary prints them in order."""
    def _rec(key, ok, detail):
        _LINES[key] = f"{'PASS' if ok else 'FAIL'} {key}: {detail}"
        return ok
    return _rec


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_LINES, key=lambda k: int(k.split()[0][1:])):
        terminalreporter.write_line(_LINES[key])
