"""Acceptance bookkeeping: tests marked ``criterion(n, title, limit)`` fail
when they run past ``limit`` seconds, and the session ends with one
PASS/FAIL line per criterion."""
import pytest

_results = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(number, title, limit): acceptance criterion with a time limit")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when != "call":
        return
    number, title = mark.args[:2]
    limit = mark.kwargs.get("limit")
    if report.passed and limit is not None and report.duration > limit:
        report.outcome = "failed"
        report.longrepr = f"criterion {number} took {report.duration:.2f}s, limit {limit}s"
    _results[number] = (report.passed, title, report.duration, limit)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        ok, title, secs, limit = _results[number]
        verdict = "PASS" if ok else "FAIL"
        bound = f" (limit {limit:g}s)" if limit is not None else ""
        terminalreporter.write_line(
            f"{verdict} criterion {number:2d}: {title} [{secs:.2f}s{bound}]")
