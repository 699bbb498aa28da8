import pytest

ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    """Record ``(criterion, case, passed, detail)`` for the end-of-run summary."""

    def record(criterion, case, passed, detail):
        ACCEPTANCE.setdefault(criterion, []).append((case, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(ACCEPTANCE):
        cases = ACCEPTANCE[criterion]
        verdict = "PASS" if all(ok for _, ok, _ in cases) else "FAIL"
        terminalreporter.write_line(f"criterion {criterion}: {verdict}")
        for case, ok, detail in cases:
            terminalreporter.write_line(f"    [{'pass' if ok else 'FAIL'}] {case}: {detail}")
