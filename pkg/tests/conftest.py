from __future__ import annotations

import numpy as np

# (criterion, PASS/FAIL, detail) lines collected by the acceptance module
ACCEPTANCE_LINES: list[tuple[str, bool, str]] = []


def report(criterion: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append((criterion, bool(ok), detail))
    print(f"{'PASS' if ok else 'FAIL'} {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {criterion}: {detail}")


def assert_phases_close(a, b, atol=1e-12):
    """Equality modulo 2 pi."""
    d = np.angle(np.exp(1j * (np.asarray(a) - np.asarray(b))))
    assert np.max(np.abs(d)) <= atol, f"max circular difference {np.max(np.abs(d)):.3e}"
