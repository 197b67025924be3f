"""Print one PASS/FAIL line per acceptance criterion at the end of the run."""

import re

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter):
    rows = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            m = _CRITERION.search(getattr(rep, "nodeid", ""))
            if not m:
                continue
            n = int(m.group(1))
            # a failure in setup or call beats a pass recorded for another phase
            if rows.get(n, ("PASS",))[0] == "FAIL":
                continue
            detail = dict(getattr(rep, "user_properties", ())).get("detail", "")
            status = "PASS" if outcome == "passed" else "FAIL"
            rows[n] = (status, m.group(2).replace("_", " "), detail)
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(rows):
        status, name, detail = rows[n]
        line = f"criterion {n:2d} {status}  {name}"
        terminalreporter.write_line(f"{line}  ({detail})" if detail else line)
