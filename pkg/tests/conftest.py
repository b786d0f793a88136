import re
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")
_outcomes: dict[int, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    match = _CRITERION.search(report.nodeid)
    if not match:
        return
    num, name = int(match.group(1)), match.group(2)
    failed = report.failed
    previous = _outcomes.get(num, (None, "PASS"))[1]
    if report.when == "call" or failed:
        status = "FAIL" if failed or previous == "FAIL" else "PASS"
        _outcomes[num] = (name.replace("_", " "), status)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_outcomes):
        name, status = _outcomes[num]
        terminalreporter.write_line(f"criterion {num:2d} [{status}] {name}")
