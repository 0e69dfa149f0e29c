import re

_ACCEPTANCE: list[tuple[str, str, str]] = []


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    m = re.search(r"test_criterion_(\d+)", report.nodeid)
    if m and "test_acceptance" in report.nodeid:
        label = m.group(1).lstrip("0")
        _ACCEPTANCE.append((label, "PASS" if report.passed else "FAIL", report.nodeid.split("::")[-1]))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, status, name in _ACCEPTANCE:
        terminalreporter.write_line(f"criterion {label:>2}: {status}  {name}")
