"""Shared pytest hooks: acceptance verdicts are collected and printed at the end of the run."""

VERDICTS: dict[int, str] = {}


def record(criterion: int, title: str, ok: bool, detail: str) -> bool:
    line = f"criterion {criterion} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    VERDICTS[criterion] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(VERDICTS):
        terminalreporter.write_line(VERDICTS[n])
