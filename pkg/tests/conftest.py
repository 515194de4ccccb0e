"""Collects acceptance-criterion outcomes and prints one PASS/FAIL line per criterion."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

_CRITERIA: dict[str, str] = {}  # node id -> criterion
_OUTCOMES: dict[str, list[bool]] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            name = mark.args[0]
            _CRITERIA[item.nodeid] = name
            _OUTCOMES.setdefault(name, [])


def pytest_runtest_logreport(report):
    name = _CRITERIA.get(report.nodeid)
    if name is None:
        return
    if report.failed or (report.when == "call" and report.skipped):
        _OUTCOMES[name].append(False)
    elif report.when == "call" and report.passed:
        _OUTCOMES[name].append(True)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for name, results in _OUTCOMES.items():
        status = "NOT RUN" if not results else "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(f"{status}  {name}  ({sum(results)}/{len(results)} checks)")

