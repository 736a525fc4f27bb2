import pytest

_RESULTS = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    n = dict(report.user_properties).get("criterion")
    if n is None:
        return
    detail = dict(report.user_properties).get("detail", "")
    _RESULTS[n] = ("PASS" if report.passed else "FAIL", detail)


@pytest.fixture
def criterion(request, record_property):
    """Tag a test with its acceptance number; ``report(detail)`` attaches a summary."""
    marker = request.node.get_closest_marker("criterion")
    record_property("criterion", marker.args[0])

    def report(detail):
        record_property("detail", detail)

    return report


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        status, detail = _RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {detail}")
