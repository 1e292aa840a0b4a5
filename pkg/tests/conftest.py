"""Shared fixtures and the acceptance-suite terminal summary."""

from __future__ import annotations

import datetime as dt

import numpy as np
import pytest

_ACCEPTANCE_RESULTS: dict[str, str] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)


def make_dates(n: int, start: dt.date = dt.date(2008, 1, 2)) -> tuple:
    return tuple(start + dt.timedelta(days=i) for i in range(n))


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    nodeid = report.nodeid
    if "test_acceptance.py::test_criterion" in nodeid:
        _ACCEPTANCE_RESULTS[nodeid.split("::")[-1]] = report.outcome.upper()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name in sorted(_ACCEPTANCE_RESULTS, key=_criterion_key):
        outcome = _ACCEPTANCE_RESULTS[name]
        label = "PASS" if outcome == "PASSED" else outcome
        terminalreporter.write_line(f"{name}: {label}")


def _criterion_key(name: str):
    digits = "".join(ch for ch in name.split("_")[2] if ch.isdigit())
    return int(digits) if digits else 0
