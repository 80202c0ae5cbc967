"""Prints one verdict line per acceptance criterion after the run."""

import re

_CRITERION = re.compile(r"test_criterion_(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    verdicts = {}
    for status, label in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for rep in terminalreporter.stats.get(status, []):
            match = _CRITERION.search(getattr(rep, "nodeid", ""))
            if match is None:
                continue
            num = int(match.group(1))
            # a setup error and a call failure may both report; FAIL wins
            if label == "FAIL" or num not in verdicts:
                verdicts[num] = (label, match.group(2))
    if not verdicts:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for num in sorted(verdicts):
        label, name = verdicts[num]
        terminalreporter.write_line(f"criterion {num:02d} [{label}] {name}")
