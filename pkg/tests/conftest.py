from __future__ import annotations

import pytest

_RESULTS: dict[int, tuple[str, str, list[str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not rep.failed:
        return
    number, title = mark.args
    details = [str(v) for k, v in item.user_properties if k == "detail"]
    status = "PASS" if rep.passed else "FAIL"
    prev = _RESULTS.get(number)
    if prev is None or prev[0] == "PASS":
        _RESULTS[number] = (status, title, details)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        status, title, details = _RESULTS[number]
        extra = f"  ({'; '.join(details)})" if details else ""
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {title}{extra}")
