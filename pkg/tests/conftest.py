"""Shared fixtures: campaign runs are expensive, so each runs once per session."""

from __future__ import annotations

import pytest

from swarmcover.harness import campaigns
from swarmcover.harness.batch import aggregate

TABLE1_SEEDS = range(50)
SCALABILITY_SEEDS = range(10)
FAULT_SEEDS = range(10)

CRITERIA = {
    1: "uniformity matches brute force",
    2: "completeness ordering and magnitudes",
    3: "obstacle monotonicity",
    4: "round timing",
    5: "decentralized late-time behaviour",
    6: "MNS traffic scaling",
    7: "collisions only while establishing",
    8: "fault tolerance",
    9: "energy calculators",
    10: "determinism and conservation",
}

# criterion number -> list of (test id, passed)
_outcomes: dict[int, list[tuple[str, bool]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion this test checks")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        n = marker.args[0]
        _outcomes.setdefault(n, []).append((item.name, report.outcome == "passed"))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(CRITERIA):
        runs = _outcomes.get(n)
        if not runs:
            continue
        ok = all(p for _, p in runs)
        failed = [name for name, p in runs if not p]
        detail = "" if ok else f"  (failed: {', '.join(failed)})"
        tr.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}: {CRITERIA[n]}{detail}")


@pytest.fixture(scope="session")
def table1():
    items, _ = campaigns.replicate_table1(list(TABLE1_SEEDS))
    return items


@pytest.fixture(scope="session")
def table1_rows(table1):
    return {(r["approach"], r["obstacle_count"]): r for r in aggregate(table1)}


@pytest.fixture(scope="session")
def scalability():
    return campaigns.replicate_scalability(list(SCALABILITY_SEEDS))


@pytest.fixture(scope="session")
def faults():
    return campaigns.replicate_faults(list(FAULT_SEEDS))
