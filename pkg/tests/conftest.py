import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(key, title): acceptance criterion reported in the summary")


@pytest.fixture
def record(request):
    """Attach a measured-value note to the criterion of the running test."""
    notes = _RESULTS.setdefault(request.node.nodeid, {"notes": []})["notes"]
    return notes.append


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    entry = _RESULTS.setdefault(item.nodeid, {"notes": []})
    entry["key"], entry["title"] = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        entry["passed"] = rep.passed


def pytest_terminal_summary(terminalreporter):
    rows = [r for r in _RESULTS.values() if "passed" in r]
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for r in sorted(rows, key=lambda r: r["key"]):
        status = "PASS" if r["passed"] else "FAIL"
        note = "; ".join(r["notes"])
        terminalreporter.write_line(f"{status}  criterion {r['key']}: {r['title']}" + (f"  [{note}]" if note else ""))
