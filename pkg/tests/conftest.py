import re
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_CRITERION = re.compile(r"test_criterion_(\d+)_(\w+?)(?:\[|$)")
_outcomes: dict[tuple[int, str], list[bool]] = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid.split("::")[-1])
    if not m:
        return
    if report.when == "call" or report.outcome != "passed":
        key = (int(m.group(1)), m.group(2))
        _outcomes.setdefault(key, []).append(report.outcome == "passed")


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for (n, name), results in sorted(_outcomes.items()):
        status = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(f"{status}  criterion {n:2d}  {name.replace('_', ' ')}")
