"""Shared fixtures and the acceptance-summary reporter."""

from __future__ import annotations

import numpy as np
import pytest

from linefree.geometry import SpaceSpec
from linefree.pointset import PointSet


def random_set(p: int, n: int, density: float, rng: np.random.Generator) -> PointSet:
    space = SpaceSpec(p, n)
    bits = rng.random(space.num_points) < density
    return PointSet(space, bits.astype(np.bool_))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260818)


# -- acceptance summary ------------------------------------------------------
# test_acceptance.py names its tests test_criterion_<N>_...; after the run,
# print one PASS/FAIL line per criterion so the outcome is visible even when
# pytest captures stdout.

_CRITERIA: dict[int, str] = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    if "test_acceptance" in report.nodeid and name.startswith("test_criterion_"):
        num = int(name.split("_")[2])
        outcome = "PASS" if report.passed else "FAIL"
        prev = _CRITERIA.get(num)
        _CRITERIA[num] = outcome if prev in (None, "PASS") else prev


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for num in sorted(_CRITERIA):
        terminalreporter.write_line(f"criterion {num}: {_CRITERIA[num]}")
