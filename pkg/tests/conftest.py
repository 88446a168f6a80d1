import pytest

ACCEPTANCE_RESULTS = {}


@pytest.fixture
def criterion(request):
    """Record one pass/fail line per acceptance criterion."""

    def record(number: int, summary: str):
        ACCEPTANCE_RESULTS[number] = (summary, request.node)

    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        for number, (summary, node) in list(ACCEPTANCE_RESULTS.items()):
            if node is item:
                ACCEPTANCE_RESULTS[number] = (summary, rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        summary, passed = ACCEPTANCE_RESULTS[number]
        status = "PASS" if passed is True else "FAIL"
        terminalreporter.write_line(f"{status} criterion {number}: {summary}")
