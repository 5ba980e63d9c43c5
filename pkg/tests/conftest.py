"""Echo the acceptance verdict lines after the run.  Output capture
would otherwise swallow them except on failure."""

import sys


def _criterion_number(line):
    try:
        return int(line.split(":", 1)[0].split()[-1])
    except ValueError:
        return 99


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    mod = (sys.modules.get("tests.test_acceptance")
           or sys.modules.get("test_acceptance"))
    lines = list(getattr(mod, "_LINES", ())) if mod else []
    seen = {_criterion_number(line) for line in lines}
    for key in ("failed", "error"):
        for rep in terminalreporter.stats.get(key, ()):
            nodeid = getattr(rep, "nodeid", "")
            if "test_criterion_" not in nodeid:
                continue
            num = int(nodeid.split("test_criterion_")[1].split("_")[0])
            if num not in seen:
                seen.add(num)
                lines.append(f"criterion {num}: FAIL ({nodeid})")
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines, key=_criterion_number):
        terminalreporter.line(line)
