"""Prints the acceptance verdicts collected by test_acceptance at the end of the run."""

VERDICTS: list[tuple[str, bool, str]] = []


def record(criterion: str, passed: bool, detail: str) -> bool:
    VERDICTS.append((criterion, passed, detail))
    print(f"{criterion}: {'PASS' if passed else 'FAIL'} - {detail}", flush=True)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in VERDICTS:
        terminalreporter.write_line(f"{criterion}: {'PASS' if passed else 'FAIL'} - {detail}")
