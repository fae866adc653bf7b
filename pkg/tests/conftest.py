import re


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion, after the normal summary."""
    outcomes = {}
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", getattr(rep, "nodeid", ""))
            if not m:
                continue
            n = int(m.group(1))
            detail = next((v for k, v in rep.user_properties if k == "criterion"), "")
            ok = rep.passed and outcomes.get(n, ("PASS",))[0] == "PASS"
            if rep.when == "call" or not rep.passed:
                outcomes[n] = ("PASS" if ok else "FAIL", detail or outcomes.get(n, ("", ""))[1])
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(outcomes):
        status, detail = outcomes[n]
        terminalreporter.write_line(f"{status} criterion {n:2d}: {detail}")
