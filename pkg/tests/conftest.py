"""Shared pytest hooks: a per-criterion summary for the acceptance suite."""


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, ()):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" not in nodeid:
                continue
            name = nodeid.rsplit("::", 1)[-1]
            rows.append((name, outcome.upper()))
    if not rows:
        return
    rows.sort()
    terminalreporter.write_sep("-", "acceptance criteria")
    width = max(len(name) for name, _ in rows)
    for name, outcome in rows:
        terminalreporter.write_line(f"{name:<{width}}  {outcome}")
