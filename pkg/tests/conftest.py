_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion gate")


def pytest_runtest_logreport(report):
    marker = _criteria.get(report.nodeid)
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        marker["outcome"] = "PASS" if report.passed else "FAIL"
        marker["seconds"] = getattr(report, "duration", 0.0)


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            _criteria[item.nodeid] = {"number": m.args[0], "title": m.args[1], "outcome": "NOT RUN"}


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for info in sorted(_criteria.values(), key=lambda x: x["number"]):
        seconds = info.get("seconds")
        timing = f" ({seconds:.1f}s)" if seconds is not None else ""
        terminalreporter.write_line(f"{info['outcome']:7} criterion {info['number']:>2}: {info['title']}{timing}")


def pytest_deselected(items):
    for item in items:
        _criteria.pop(item.nodeid, None)
