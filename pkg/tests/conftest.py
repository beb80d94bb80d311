from collections import defaultdict

import pytest

_results = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion the test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        detail = dict(item.user_properties).get("detail", "")
        _results[marker.args[0]].append((item.name, rep.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(_results):
        checks = _results[crit]
        ok = all(passed for _, passed, _ in checks)
        tr.write_line(f"criterion {crit}: {'PASS' if ok else 'FAIL'} ({sum(p for _, p, _ in checks)}/{len(checks)} checks)")
        for name, passed, detail in checks:
            tr.write_line(f"    {'pass' if passed else 'FAIL'} {name}: {detail}")
