import sys


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance suite's per-criterion lines after the run.

    Output capture hides them mid-run on passing tests; this prints each
    recorded line once, in criterion order, at the end.
    """
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "REPORT_LINES", None) if mod else None
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.line(line)
