import _acceptance_log as acc


def pytest_terminal_summary(terminalreporter):
    if not acc.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(acc.TITLES):
        terminalreporter.write_line(acc.line(k))
