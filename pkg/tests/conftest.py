import re

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)$")
_RESULTS: dict = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if m is None:
        return
    n = int(m.group(1))
    if report.when == "call" or report.failed:
        _RESULTS[n] = _RESULTS.get(n, True) and report.passed


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        terminalreporter.write_line(f"criterion {n}: {'PASS' if _RESULTS[n] else 'FAIL'}")
