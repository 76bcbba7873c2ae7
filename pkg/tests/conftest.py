from collections import defaultdict

# criterion number -> {"desc": str, "parts": {part name: bool}}
ACCEPTANCE = defaultdict(lambda: {"desc": "", "parts": {}})


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        entry = ACCEPTANCE[num]
        parts = entry["parts"]
        ok = all(parts.values())
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {entry['desc']}"
        failed = [name for name, good in parts.items() if not good]
        if failed:
            line += f" (failing: {', '.join(failed)})"
        terminalreporter.write_line(line)
