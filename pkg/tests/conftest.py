import pytest

_VERDICTS: list[str] = []


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance check, printed live and in the summary."""
    label = request.node.get_closest_marker("criterion").args[0]
    yield
    failed = getattr(request.node, "_call_failed", True)
    line = f"{'FAIL' if failed else 'PASS'} {label}"
    print(f"\n{line}")
    _VERDICTS.append(line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call":
        item._call_failed = report.failed


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion reported as PASS/FAIL")


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
