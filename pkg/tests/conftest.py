ACCEPTANCE: dict = {}


def record(criterion: int, ok: bool, detail: str) -> bool:
    """Store and print one PASS/FAIL line for an acceptance criterion."""
    line = f"ACCEPTANCE {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[criterion] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
