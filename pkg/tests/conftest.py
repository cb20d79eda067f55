import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# Filled by tests/test_acceptance.py through the ``criterion`` fixture.
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number, name, ok, detail in sorted(ACCEPTANCE, key=lambda r: (r[0], r[1])):
        tr.write_line(f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {name}: {detail}")
