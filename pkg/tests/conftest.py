import pytest

_results: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    n, title = marker.args
    notes = getattr(item, "acceptance_notes", [])
    prev = _results.get(n)
    passed = rep.passed and (prev is None or prev[0])
    _results[n] = [passed, title, (prev[2] if prev else []) + notes]


@pytest.fixture
def note(request):
    """Attach a short informational line to the criterion summary."""
    request.node.acceptance_notes = []
    return request.node.acceptance_notes.append


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        passed, title, notes = _results[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if passed else 'FAIL'}  {title}")
        for line in notes:
            terminalreporter.write_line(f"               {line}")
