import sys


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(results):
        entries = results[n]
        ok = all(e[0] for e in entries)
        tr.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}")
        for passed, detail in entries:
            tr.write_line(f"    [{'ok' if passed else 'FAIL'}] {detail}")
