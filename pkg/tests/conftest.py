import os

from hypothesis import HealthCheck, settings

settings.register_profile(
    "repo", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))

import pytest

_ACCEPTANCE = []


@pytest.fixture(scope="session")
def acceptance():
    """Record one criterion line: ``record(number, label, ok, detail)``."""

    def record(number, label, ok, detail=""):
        _ACCEPTANCE.append((number, label, bool(ok), detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, label, ok, detail in sorted(_ACCEPTANCE, key=lambda r: (r[0], r[1])):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {label}  ({detail})")
