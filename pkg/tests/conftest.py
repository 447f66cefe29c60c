"""Shared test hooks: collect acceptance gate lines and echo them at the end."""

GATE_LINES: list[str] = []


def record_gate(name: str, value, gate: str, passed: bool) -> None:
    status = "PASS" if passed else "FAIL"
    line = f"[{status}] {name}: {value} ({gate})"
    GATE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not GATE_LINES:
        return
    terminalreporter.section("acceptance gates")
    for line in GATE_LINES:
        terminalreporter.write_line(line)
