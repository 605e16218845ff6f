from collections import defaultdict

import pytest

_outcomes = defaultdict(list)
_titles = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion a test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number = marker.args[0]
    if len(marker.args) > 1:
        _titles[number] = marker.args[1]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _outcomes[number].append((item.name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_outcomes):
        results = _outcomes[number]
        passed = sum(1 for _, o in results if o == "passed")
        status = "PASS" if passed == len(results) else "FAIL"
        line = f"criterion {number}: {status} ({passed}/{len(results)} checks) {_titles.get(number, '')}"
        terminalreporter.write_line(line.rstrip())
        for name, o in results:
            if o != "passed":
                terminalreporter.write_line(f"    {o}: {name}")
