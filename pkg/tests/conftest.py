"""Collects acceptance outcomes and prints one verdict line per criterion."""

from collections import defaultdict

_outcomes = defaultdict(list)
_titles = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion the test belongs to")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            item.user_properties.append(("criterion", mark.args[0]))
            _titles[mark.args[0]] = mark.args[1]


def pytest_runtest_logreport(report):
    number = dict(report.user_properties).get("criterion")
    if number is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _outcomes[number].append((report.nodeid, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_outcomes):
        results = _outcomes[number]
        ok = sum(passed for _, passed in results)
        verdict = "PASS" if ok == len(results) else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} {verdict}  ({ok}/{len(results)})  {_titles[number]}")
        for nodeid, passed in results:
            if not passed:
                terminalreporter.write_line(f"    failed: {nodeid.split('::', 1)[1]}")
