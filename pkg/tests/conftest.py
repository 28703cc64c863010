import pytest

ACCEPTANCE_FILE = "test_acceptance.py"
_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion tag")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or item.fspath.basename != ACCEPTANCE_FILE:
        return
    key = (marker.args[0], marker.args[1])
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        prev = _results.get(key, "PASS")
        status = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
        _results[key] = status if prev == "PASS" else prev


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), status in sorted(_results.items()):
        terminalreporter.write_line(f"criterion {number}: {status:<4}  {title}")
